"""Knights-and-knaves puzzles: brute-force solving over truth assignments.

Each of n persons makes one statement about who is a knight. Knights
always tell the truth; knaves always lie. The solver scans all 2^n role
assignments; an assignment is a solution iff every person's statement
truth value matches their role.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .core import PuzzleError, PuzzleInstance, PuzzleMeta, SolutionSet, TaskKind
from .rng import child_rng

MAX_DEPTH = 3
DEFAULT_RETRY_BUDGET = 10_000

KNIGHT = True
KNAVE = False


# Formulas are nested tuples (JSON-friendly lists after serialization):
#   ["atom", person_index]      IsKnight(person)
#   ["not", f]
#   ["and", f, g] / ["or", f, g] / ["iff", f, g]
Formula = list


def eval_formula(f: Formula, roles: tuple[bool, ...]) -> bool:
    op = f[0]
    if op == "atom":
        return roles[f[1]]
    if op == "not":
        return not eval_formula(f[1], roles)
    if op == "and":
        return eval_formula(f[1], roles) and eval_formula(f[2], roles)
    if op == "or":
        return eval_formula(f[1], roles) or eval_formula(f[2], roles)
    if op == "iff":
        return eval_formula(f[1], roles) == eval_formula(f[2], roles)
    raise PuzzleError("invalid_formula", f"unknown connective {op!r}")


def formula_depth(f: Formula) -> int:
    if f[0] == "atom":
        return 0
    return 1 + max(formula_depth(g) for g in f[1:] if isinstance(g, list))


def formula_persons(f: Formula) -> set[int]:
    if f[0] == "atom":
        return {f[1]}
    out: set[int] = set()
    for g in f[1:]:
        if isinstance(g, list):
            out |= formula_persons(g)
    return out


def _person_name(i: int) -> str:
    return f"P{i + 1}"


def render_formula(f: Formula) -> str:
    op = f[0]
    if op == "atom":
        return f"{_person_name(f[1])} is a knight"
    if op == "not":
        inner = f[1]
        if inner[0] == "atom":
            return f"{_person_name(inner[1])} is a knave"
        return f"it is not the case that ({render_formula(inner)})"
    joiner = {"and": "and", "or": "or", "iff": "if and only if"}[op]
    return f"({render_formula(f[1])}) {joiner} ({render_formula(f[2])})"


@dataclass(frozen=True)
class KnkPuzzle:
    n_persons: int
    statements: tuple[Any, ...]  # statements[i] is person i's formula

    def __post_init__(self):
        if not 2 <= self.n_persons <= 8:
            raise PuzzleError("invalid_puzzle", "n_persons must be in 2..8")
        if len(self.statements) != self.n_persons:
            raise PuzzleError("invalid_puzzle", "exactly one statement per person")
        for i, f in enumerate(self.statements):
            if formula_depth(f) > MAX_DEPTH:
                raise PuzzleError("invalid_puzzle", f"statement {i} exceeds depth {MAX_DEPTH}")
            bad = formula_persons(f) - set(range(self.n_persons))
            if bad:
                raise PuzzleError("invalid_puzzle", f"statement {i} references person {bad}")

    def rendered(self) -> list[str]:
        return [
            f"{_person_name(i)} says: \"{render_formula(f)}\""
            for i, f in enumerate(self.statements)
        ]


def canonical_roles(roles: tuple[bool, ...]) -> str:
    """Persons in index order, 'Pi=knight|knave' joined by commas."""
    return ",".join(
        f"{_person_name(i)}={'knight' if r else 'knave'}" for i, r in enumerate(roles)
    )


def parse_roles(line: str, n_persons: int) -> tuple[bool, ...]:
    """Parse 'P1=knight,P2=knave,...'; must cover all persons exactly once."""
    seen: dict[int, bool] = {}
    for part in line.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, role = part.partition("=")
        name = name.strip().upper()
        role = role.strip().lower()
        if not name.startswith("P") or not name[1:].isdigit():
            raise PuzzleError("bad_answer", f"bad person name {name!r}")
        idx = int(name[1:]) - 1
        if role not in ("knight", "knave"):
            raise PuzzleError("bad_answer", f"bad role {role!r}")
        if idx in seen:
            raise PuzzleError("bad_answer", f"person {name} assigned twice")
        seen[idx] = role == "knight"
    if set(seen) != set(range(n_persons)):
        raise PuzzleError(
            "incomplete_assignment",
            f"assignment covers {sorted(seen)} of {n_persons} persons",
        )
    return tuple(seen[i] for i in range(n_persons))


def solve(p: KnkPuzzle) -> SolutionSet:
    """Exhaustive scan over 2^n assignments."""
    n = p.n_persons
    found = []
    for bits in range(1 << n):
        roles = tuple(bool(bits >> i & 1) for i in range(n))
        if all(
            eval_formula(p.statements[i], roles) == roles[i] for i in range(n)
        ):
            found.append(canonical_roles(roles))
    return SolutionSet(found)


def verify(p: KnkPuzzle, roles: tuple[bool, ...]) -> bool:
    if len(roles) != p.n_persons:
        raise PuzzleError(
            "incomplete_assignment",
            f"assignment has {len(roles)} persons, puzzle has {p.n_persons}",
        )
    return all(eval_formula(p.statements[i], roles) == roles[i] for i in range(p.n_persons))


def _random_formula(rng, n_persons: int, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        return ["atom", rng.randrange(n_persons)]
    op = rng.choice(["not", "and", "or", "iff"])
    if op == "not":
        return ["not", _random_formula(rng, n_persons, depth - 1)]
    return [
        op,
        _random_formula(rng, n_persons, depth - 1),
        _random_formula(rng, n_persons, depth - 1),
    ]


def generate(
    n_persons: int,
    seed: int,
    stage: str = "eval",
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> PuzzleInstance:
    """Generate a puzzle with exactly one solution."""
    if not 2 <= n_persons <= 8:
        raise PuzzleError("invalid_puzzle", "n_persons must be in 2..8")
    rng = child_rng(seed, "knk", n_persons)
    for attempt in range(retry_budget):
        statements = tuple(
            _random_formula(rng, n_persons, rng.randint(1, 2)) for _ in range(n_persons)
        )
        p = KnkPuzzle(n_persons, statements)
        sols = solve(p)
        if len(sols) == 1:
            return PuzzleInstance(
                id=f"knk-{seed}",
                kind=TaskKind.KNIGHTS_KNAVES,
                payload={
                    "n_persons": n_persons,
                    "statements": [list(_as_json(f)) for f in statements],
                    "rendered": p.rendered(),
                },
                solutions=sols,
                meta=PuzzleMeta(
                    solution_count=1,
                    seed=seed,
                    stage=stage,
                    difficulty=(f"persons={n_persons}",),
                ),
            )
    raise PuzzleError(
        "retry_exhausted", f"no unique-solution puzzle in {retry_budget} attempts"
    )


def _as_json(f: Formula) -> list:
    return [f[0]] + [(_as_json(g) if isinstance(g, list) else g) for g in f[1:]]


def puzzle_from_payload(payload: dict) -> KnkPuzzle:
    return KnkPuzzle(
        n_persons=int(payload["n_persons"]),
        statements=tuple(payload["statements"]),
    )
