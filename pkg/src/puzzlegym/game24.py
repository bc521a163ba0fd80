"""Poker-24 / Make-24 environment.

Exhaustive expression enumeration to 24 with exact rational arithmetic
(fractions.Fraction; floats are never used in evaluation), an infix
parser/verifier for model answers, and solution-count-controlled hand
generation.

Two expressions count as the same solution iff their trees are identical
after recursively sorting the operands of + and * by canonical string.
No associativity flattening and no other algebraic identities, so e.g.
(a-b)+c and (a+c)-b remain distinct. This convention determines the
solution-count buckets everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product

from .core import PuzzleError, PuzzleInstance, PuzzleMeta, SolutionSet, TaskKind
from .rng import child_rng

VALUE_RANGE = {TaskKind.POKER24: (1, 13), TaskKind.MAKE24: (1, 9)}
TARGET = Fraction(24)
DEFAULT_RETRY_BUDGET = 20_000

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_ALIASES = {"×": "*", "÷": "/", "−": "-"}


@dataclass(frozen=True)
class Hand:
    variant: TaskKind
    values: tuple[int, ...]

    def __post_init__(self):
        if self.variant not in VALUE_RANGE:
            raise PuzzleError("invalid_hand", f"bad variant {self.variant}")
        lo, hi = VALUE_RANGE[self.variant]
        if len(self.values) != 4:
            raise PuzzleError("invalid_hand", "a hand has exactly 4 values")
        for v in self.values:
            if not lo <= v <= hi:
                raise PuzzleError(
                    "invalid_hand", f"value {v} outside {lo}..{hi} for {self.variant.value}"
                )

    def multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.values))


class Expr:
    """Binary expression tree over integer leaves."""

    __slots__ = ()

    def value(self) -> Fraction:
        raise NotImplementedError

    def leaves(self) -> list[int]:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    n: int

    def value(self) -> Fraction:
        return Fraction(self.n)

    def leaves(self) -> list[int]:
        return [self.n]


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def value(self) -> Fraction:
        a, b = self.left.value(), self.right.value()
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0:
            raise ZeroDivisionError("division by zero in subexpression")
        return a / b

    def leaves(self) -> list[int]:
        return self.left.leaves() + self.right.leaves()


def canonicalize(e: Expr) -> Expr:
    """Recursively sort operands of + and * by canonical string. Idempotent."""
    if isinstance(e, Num):
        return e
    left = canonicalize(e.left)
    right = canonicalize(e.right)
    if e.op in "+*" and render(left) > render(right):
        left, right = right, left
    return BinOp(e.op, left, right)


def render(e: Expr) -> str:
    """Canonical infix rendering with minimal parentheses."""
    if isinstance(e, Num):
        return str(e.n)
    lp = _render_side(e.left, e.op, is_right=False)
    rp = _render_side(e.right, e.op, is_right=True)
    return f"{lp}{e.op}{rp}"


def _render_side(child: Expr, parent_op: str, is_right: bool) -> str:
    text = render(child)
    if isinstance(child, Num):
        return text
    cp, pp = _PRECEDENCE[child.op], _PRECEDENCE[parent_op]
    # Right children of equal precedence are always parenthesized so that
    # the rendering is injective on trees (a+(b+c) stays distinct from
    # (a+b)+c, matching the no-associativity-flattening dedup rule).
    if cp < pp or (cp == pp and is_right):
        return f"({text})"
    return text


_TREE_SHAPES = (
    # Parenthesization shapes over leaves a,b,c,d; ops o1,o2,o3.
    lambda a, b, c, d, o1, o2, o3: BinOp(o3, BinOp(o2, BinOp(o1, a, b), c), d),
    lambda a, b, c, d, o1, o2, o3: BinOp(o3, BinOp(o1, a, BinOp(o2, b, c)), d),
    lambda a, b, c, d, o1, o2, o3: BinOp(o2, BinOp(o1, a, b), BinOp(o3, c, d)),
    lambda a, b, c, d, o1, o2, o3: BinOp(o1, a, BinOp(o3, BinOp(o2, b, c), d)),
    lambda a, b, c, d, o1, o2, o3: BinOp(o1, a, BinOp(o2, b, BinOp(o3, c, d))),
)


def raw_expressions(values: tuple[int, ...]):
    """All 4! x 5 x 4^3 = 7680 raw expression trees over the hand."""
    for perm in permutations(values):
        leaves = [Num(v) for v in perm]
        for ops in product("+-*/", repeat=3):
            for shape in _TREE_SHAPES:
                yield shape(*leaves, *ops)


def enumerate_raw(values: tuple[int, ...]) -> list[Expr]:
    """Every raw tree evaluating exactly to 24 (no dedup)."""
    hits = []
    for e in raw_expressions(values):
        try:
            if e.value() == TARGET:
                hits.append(e)
        except ZeroDivisionError:
            continue
    return hits


_FLOAT_SHAPES = (
    lambda a, b, c, d, o1, o2, o3: o3(o2(o1(a, b), c), d),
    lambda a, b, c, d, o1, o2, o3: o3(o1(a, o2(b, c)), d),
    lambda a, b, c, d, o1, o2, o3: o2(o1(a, b), o3(c, d)),
    lambda a, b, c, d, o1, o2, o3: o1(a, o3(o2(b, c), d)),
    lambda a, b, c, d, o1, o2, o3: o1(a, o2(b, o3(c, d))),
)


class _TinyDenominator(ZeroDivisionError):
    """Float denominator too close to 0 to trust; re-check exactly."""


def _fdiv(a: float, b: float) -> float:
    if abs(b) < 1e-9:
        raise _TinyDenominator
    return a / b


_FLOAT_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _fdiv,
}


@lru_cache(maxsize=65536)
def _enumerate_cached(values: tuple[int, ...]) -> frozenset[str]:
    """Float pre-filter with exact rational confirmation of every hit.

    A true rational value within 1e-6 of 24 over these operand magnitudes
    must be exactly 24, so no solution escapes the filter; the Fraction
    recheck removes any float near-miss.
    """
    out: set[str] = set()
    for perm in sorted(set(permutations(values))):
        floats = tuple(float(v) for v in perm)
        for ops in product("+-*/", repeat=3):
            fops = tuple(_FLOAT_OPS[o] for o in ops)
            for si, shape in enumerate(_FLOAT_SHAPES):
                tree = None
                try:
                    v = _FLOAT_SHAPES[si](*floats, *fops)
                except _TinyDenominator:
                    # Denominator ambiguous in floats: evaluate exactly.
                    tree = _TREE_SHAPES[si](*(Num(p) for p in perm), *ops)
                    try:
                        v = float(tree.value())
                    except ZeroDivisionError:
                        continue
                if abs(v - 24.0) > 1e-6:
                    continue
                if tree is None:
                    tree = _TREE_SHAPES[si](*(Num(p) for p in perm), *ops)
                try:
                    if tree.value() == TARGET:
                        out.add(render(canonicalize(tree)))
                except ZeroDivisionError:
                    continue
    return frozenset(out)


def enumerate_solutions(h: Hand) -> SolutionSet:
    """All canonical solutions of the hand (deduplicated)."""
    return SolutionSet(_enumerate_cached(h.multiset()))


class _Parser:
    """Recursive-descent infix parser: literals, + - * /, parentheses."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise PuzzleError("syntax_error", f"{msg} at offset {self.pos}")

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return ""
        return _ALIASES.get(self.text[self.pos], self.text[self.pos])

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.text[self.pos]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while (op := self.peek()) in "+-" and op:
            self.pos += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while (op := self.peek()) in "*/" and op:
            self.pos += 1
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return e
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            n = int(self.text[start : self.pos])
            if not 1 <= n <= 13:
                self.pos = start
                self.error(f"literal {n} outside 1..13")
            return Num(n)
        if ch == "":
            self.error("unexpected end of input")
        self.error(f"unexpected {ch!r}")


def parse_expression(text: str) -> Expr:
    return _Parser(text).parse()


def verify_expression(h: Hand, text: str) -> dict:
    """{'valid': bool, 'reason': str}; never raises for bad candidate text."""
    try:
        e = parse_expression(text)
    except PuzzleError as exc:
        return {"valid": False, "reason": str(exc)}
    if tuple(sorted(e.leaves())) != h.multiset():
        missing = sorted(set(e.leaves()) - set(h.values))
        if missing:
            reason = f"literal {missing[0]} not in hand"
        else:
            reason = f"literals {sorted(e.leaves())} do not match hand {list(h.multiset())}"
        return {"valid": False, "reason": reason}
    try:
        v = e.value()
    except ZeroDivisionError:
        return {"valid": False, "reason": "division by zero"}
    if v != TARGET:
        return {"valid": False, "reason": f"value != 24 (={v})"}
    return {"valid": True, "reason": "ok"}


def generate(
    variant: TaskKind,
    target_count: int,
    seed: int,
    stage: str = "eval",
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> PuzzleInstance:
    """Generate a hand with exactly target_count distinct solutions."""
    if variant not in VALUE_RANGE:
        raise PuzzleError("invalid_hand", f"bad variant {variant}")
    if not 1 <= target_count <= 4:
        raise PuzzleError("invalid_target", "target_count must be in 1..4")
    lo, hi = VALUE_RANGE[variant]
    rng = child_rng(seed, "game24", variant.value, target_count)
    for attempt in range(retry_budget):
        values = tuple(sorted(rng.randint(lo, hi) for _ in range(4)))
        hand = Hand(variant, values)
        sols = enumerate_solutions(hand)
        if len(sols) == target_count:
            return PuzzleInstance(
                id=f"{variant.value.lower()}-{seed}",
                kind=variant,
                payload={"variant": variant.value, "values": list(values)},
                solutions=sols,
                meta=PuzzleMeta(solution_count=target_count, seed=seed, stage=stage),
            )
    raise PuzzleError(
        "retry_exhausted",
        f"no {variant.value} hand with {target_count} solutions in {retry_budget} attempts",
    )


def hand_from_payload(payload: dict) -> Hand:
    return Hand(TaskKind(payload["variant"]), tuple(int(v) for v in payload["values"]))
