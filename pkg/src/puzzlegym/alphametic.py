"""Alphametic (cryptarithm) environment.

Addition equations over uppercase words where each letter maps to a
distinct digit and leading letters are nonzero. The enumeration oracle
does column-wise backtracking with carry propagation and is exhaustive:
it returns exactly the assignments a full permutation scan would.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .core import PuzzleError, PuzzleInstance, PuzzleMeta, SolutionSet, TaskKind
from .rng import child_rng

DEFAULT_SHAPE = {"addend_count": 2, "word_len": 3}
DEFAULT_RETRY_BUDGET = 10_000


@dataclass(frozen=True)
class AlphameticPuzzle:
    addends: tuple[str, ...]
    sum_word: str

    def __post_init__(self):
        words = list(self.addends) + [self.sum_word]
        if len(self.addends) < 2:
            raise PuzzleError("invalid_puzzle", "need at least 2 addends")
        for w in words:
            if not w or not w.isalpha() or w != w.upper():
                raise PuzzleError("invalid_puzzle", f"bad word {w!r}")
        if len(self.letters()) > 10:
            raise PuzzleError(
                "too_many_letters", f"{len(self.letters())} distinct letters > 10"
            )

    def letters(self) -> frozenset[str]:
        return frozenset("".join(self.addends) + self.sum_word)

    def leading(self) -> frozenset[str]:
        return frozenset(
            w[0] for w in (*self.addends, self.sum_word) if len(w) > 1
        )

    def equation(self) -> str:
        return " + ".join(self.addends) + " = " + self.sum_word


def canonical_assignment(assignment: dict[str, int]) -> str:
    """Letters sorted alphabetically, 'L=d' pairs joined by commas."""
    return ",".join(f"{k}={assignment[k]}" for k in sorted(assignment))


def parse_assignment(line: str, letters: frozenset[str]) -> dict[str, int]:
    """Parse one 'L=d' comma-separated line; must cover exactly `letters`."""
    out: dict[str, int] = {}
    for part in line.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise PuzzleError("bad_answer", f"expected L=d pair, got {part!r}")
        k, _, v = part.partition("=")
        k = k.strip().upper()
        v = v.strip()
        if len(k) != 1 or not k.isalpha() or not v.isdigit() or len(v) != 1:
            raise PuzzleError("bad_answer", f"expected L=d pair, got {part!r}")
        if k in out:
            raise PuzzleError("bad_answer", f"letter {k} assigned twice")
        out[k] = int(v)
    if set(out) != set(letters):
        raise PuzzleError(
            "incomplete_assignment",
            f"assignment covers {sorted(out)} but puzzle letters are {sorted(letters)}",
        )
    return out


def verify(p: AlphameticPuzzle, a: dict[str, int]) -> bool:
    """True iff the arithmetic holds and all digit constraints are met."""
    if set(a) != set(p.letters()):
        raise PuzzleError("incomplete_assignment", "assignment must cover puzzle letters")
    if len(set(a.values())) != len(a):
        return False
    if any(a[l] == 0 for l in p.leading()):
        return False

    def value(word: str) -> int:
        n = 0
        for ch in word:
            n = n * 10 + a[ch]
        return n

    return sum(value(w) for w in p.addends) == value(p.sum_word)


def enumerate_solutions(p: AlphameticPuzzle, limit: int | None = None) -> SolutionSet:
    """All satisfying assignments, via column/carry backtracking.

    Columns are processed rightmost first; letters are assigned in first
    column appearance order, digits tried ascending. With `limit` the
    search stops once that many solutions exist (used by generators that
    only need to know whether a count exceeds the 1..4 range).
    """
    words = [w[::-1] for w in p.addends]
    total = p.sum_word[::-1]
    n_cols = len(total)
    if any(len(w) > n_cols for w in words):
        return SolutionSet()  # sum shorter than an addend: impossible

    leading = p.leading()
    assigned: dict[str, int] = {}
    used = [False] * 10
    found: list[str] = []

    def column_letters(col: int) -> list[str]:
        seen = []
        for w in words:
            if col < len(w) and w[col] not in assigned and w[col] not in seen:
                seen.append(w[col])
        t = total[col]
        if t not in assigned and t not in seen:
            seen.append(t)
        return seen

    def check_column(col: int, carry: int) -> int | None:
        """Column sum consistency; returns the outgoing carry or None."""
        s = carry
        for w in words:
            if col < len(w):
                s += assigned[w[col]]
        if s % 10 != assigned[total[col]]:
            return None
        return s // 10

    def dfs(col: int, carry: int):
        if limit is not None and len(found) >= limit:
            return
        if col == n_cols:
            if carry == 0:
                found.append(canonical_assignment(assigned))
            return
        pending = column_letters(col)

        def assign(idx: int):
            if idx == len(pending):
                out = check_column(col, carry)
                if out is not None:
                    dfs(col + 1, out)
                return
            letter = pending[idx]
            start = 1 if letter in leading else 0
            for d in range(start, 10):
                if used[d]:
                    continue
                assigned[letter] = d
                used[d] = True
                assign(idx + 1)
                del assigned[letter]
                used[d] = False

        assign(0)

    dfs(0, 0)
    return SolutionSet(found)


def enumerate_naive(p: AlphameticPuzzle) -> SolutionSet:
    """Full injective-map scan; the independent oracle for small puzzles."""
    letters = sorted(p.letters())
    found = []
    for digits in permutations(range(10), len(letters)):
        a = dict(zip(letters, digits))
        if any(a[l] == 0 for l in p.leading()):
            continue
        if verify(p, a):
            found.append(canonical_assignment(a))
    return SolutionSet(found)


def _random_puzzle(rng, addend_count: int, word_len: int) -> AlphameticPuzzle | None:
    """Build a random solvable equation by picking digits first.

    Digits in the addends and their sum are relabeled to random letters,
    which guarantees at least one solution; the caller then counts.
    Addend digits come from a small sampled pool: puzzles with few
    distinct letters are far more likely to land in the 1..4 solution
    range the training distribution needs.
    """
    pool = rng.sample("0123456789", rng.randint(3, 6))
    nonzero = [d for d in pool if d != "0"]
    if not nonzero:
        return None

    def draw_value() -> int:
        digits = [rng.choice(nonzero)] + [
            rng.choice(pool) for _ in range(word_len - 1)
        ]
        return int("".join(digits))

    addend_vals = [draw_value() for _ in range(addend_count)]
    total = sum(addend_vals)
    digits_used = set("".join(str(v) for v in addend_vals) + str(total))
    if len(digits_used) > 10:
        return None
    letters = rng.sample("ABCDEFGHIJKLMNOPQRSTUVWXYZ", len(digits_used))
    mapping = dict(zip(sorted(digits_used), letters))
    to_word = lambda v: "".join(mapping[d] for d in str(v))
    try:
        return AlphameticPuzzle(
            addends=tuple(to_word(v) for v in addend_vals),
            sum_word=to_word(total),
        )
    except PuzzleError:
        return None


def generate(
    target_count: int,
    seed: int,
    shape: dict | None = None,
    stage: str = "eval",
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> PuzzleInstance:
    """Generate a puzzle whose oracle solution count is exactly target_count."""
    if not 1 <= target_count <= 4:
        raise PuzzleError("invalid_target", "target_count must be in 1..4")
    shape = {**DEFAULT_SHAPE, **(shape or {})}
    rng = child_rng(seed, "alphametic", target_count)
    for attempt in range(retry_budget):
        p = _random_puzzle(rng, shape["addend_count"], shape["word_len"])
        if p is None:
            continue
        # limit = target+1 keeps the search cheap on many-solution duds while
        # still proving the count is exactly target when it stops short.
        sols = enumerate_solutions(p, limit=target_count + 1)
        if len(sols) == target_count:
            return PuzzleInstance(
                id=f"alphametic-{seed}",
                kind=TaskKind.ALPHAMETIC,
                payload={"addends": list(p.addends), "sum_word": p.sum_word},
                solutions=sols,
                meta=PuzzleMeta(
                    solution_count=target_count, seed=seed, stage=stage
                ),
            )
    raise PuzzleError(
        "retry_exhausted",
        f"no puzzle with exactly {target_count} solutions in {retry_budget} attempts",
    )


def puzzle_from_payload(payload: dict) -> AlphameticPuzzle:
    return AlphameticPuzzle(
        addends=tuple(payload["addends"]), sum_word=payload["sum_word"]
    )
