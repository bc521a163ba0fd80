"""Shared puzzle data model and line-oriented serialization.

A PuzzleInstance is one task: its kind, a task-specific payload, the
canonical ground-truth solution set, and provenance metadata. Instances
round-trip byte-identically through one-JSON-object-per-line records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class PuzzleError(Exception):
    """Structured error with a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class TaskKind(str, Enum):
    SUDOKU6 = "Sudoku6"
    SUDOKU9 = "Sudoku9"
    ALPHAMETIC = "Alphametic"
    POKER24 = "Poker24"
    MAKE24 = "Make24"
    KNIGHTS_KNAVES = "KnightsKnaves"
    CROSSWORD5 = "Crossword5"


class SolutionSet:
    """Deduplicated set of canonical solution strings.

    Equality is order-independent set equality of the canonical forms,
    which makes the exact-match accuracy check independent of the order
    a model lists its solutions in.
    """

    __slots__ = ("members",)

    def __init__(self, members: Any = ()):
        self.members: frozenset[str] = frozenset(members)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SolutionSet):
            return self.members == other.members
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item: str) -> bool:
        return item in self.members

    def __repr__(self) -> str:
        return f"SolutionSet({sorted(self.members)!r})"

    def sorted(self) -> list[str]:
        return sorted(self.members)


@dataclass(frozen=True)
class PuzzleMeta:
    solution_count: int
    seed: int
    stage: str = "eval"  # "1", "2", or "eval"
    difficulty: tuple[str, ...] = ()


@dataclass(frozen=True)
class PuzzleInstance:
    id: str
    kind: TaskKind
    payload: dict[str, Any]
    solutions: SolutionSet
    meta: PuzzleMeta

    def __post_init__(self):
        if self.meta.solution_count != len(self.solutions):
            raise PuzzleError(
                "solution_count_mismatch",
                f"meta.solution_count={self.meta.solution_count} but "
                f"|solutions|={len(self.solutions)}",
            )


def serialize_instance(p: PuzzleInstance) -> str:
    """One compact JSON object per instance, stable key order, no newline."""
    record = {
        "id": p.id,
        "kind": p.kind.value,
        "payload": p.payload,
        "solutions": p.solutions.sorted(),
        "meta": {
            "solution_count": p.meta.solution_count,
            "seed": p.meta.seed,
            "stage": p.meta.stage,
            "difficulty": list(p.meta.difficulty),
        },
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def parse_instance(record: str) -> PuzzleInstance:
    """Parse one serialized line back into an instance.

    Raises PuzzleError with code "malformed_syntax", "unknown_kind",
    "duplicate_solution", or "solution_count_mismatch".
    """
    try:
        obj = json.loads(record)
    except (json.JSONDecodeError, TypeError) as exc:
        raise PuzzleError("malformed_syntax", f"invalid JSON record: {exc}") from exc
    if not isinstance(obj, dict):
        raise PuzzleError("malformed_syntax", "record is not a JSON object")
    for key in ("id", "kind", "payload", "solutions", "meta"):
        if key not in obj:
            raise PuzzleError("malformed_syntax", f"missing field {key!r}")
    try:
        kind = TaskKind(obj["kind"])
    except ValueError:
        raise PuzzleError("unknown_kind", f"unknown kind {obj['kind']!r}") from None
    sols = obj["solutions"]
    if not isinstance(sols, list) or not all(isinstance(s, str) for s in sols):
        raise PuzzleError("malformed_syntax", "field 'solutions' must be a string list")
    if len(set(sols)) != len(sols):
        raise PuzzleError("duplicate_solution", "solutions list contains duplicates")
    meta_obj = obj["meta"]
    if not isinstance(meta_obj, dict):
        raise PuzzleError("malformed_syntax", "field 'meta' must be an object")
    try:
        meta = PuzzleMeta(
            solution_count=int(meta_obj["solution_count"]),
            seed=int(meta_obj["seed"]),
            stage=str(meta_obj["stage"]),
            difficulty=tuple(meta_obj.get("difficulty", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PuzzleError("malformed_syntax", f"bad meta: {exc}") from exc
    if meta.solution_count != len(sols):
        raise PuzzleError(
            "solution_count_mismatch",
            f"meta.solution_count={meta.solution_count} but record lists {len(sols)}",
        )
    return PuzzleInstance(
        id=str(obj["id"]),
        kind=kind,
        payload=obj["payload"],
        solutions=SolutionSet(sols),
        meta=meta,
    )
