"""5x5 mini-crossword benchmark loader and scorer (verification only).

The suite file is a JSON array of entries {clues_across[5], clues_down[5],
answer_rows[5]}. Scoring reports three granularities: per-letter accuracy,
per-word accuracy (5 across + 5 down), and full-grid success; the headline
number uses word accuracy, with the other two always emitted alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .core import PuzzleError, PuzzleInstance, PuzzleMeta, SolutionSet, TaskKind

SIZE = 5


@dataclass(frozen=True)
class CrosswordPuzzle:
    clues_across: tuple[str, ...]
    clues_down: tuple[str, ...]
    answer_rows: tuple[str, ...]  # 5 uppercase 5-letter strings

    def __post_init__(self):
        if len(self.clues_across) != SIZE or len(self.clues_down) != SIZE:
            raise PuzzleError("invalid_puzzle", "need 5 across and 5 down clues")
        if len(self.answer_rows) != SIZE:
            raise PuzzleError("invalid_puzzle", "answer grid must have 5 rows")
        for r, row in enumerate(self.answer_rows):
            if len(row) != SIZE or not row.isalpha() or row != row.upper():
                raise PuzzleError(
                    "invalid_puzzle", f"answer row {r} must be 5 uppercase letters"
                )

    def canonical(self) -> str:
        return "".join(self.answer_rows)

    def words(self) -> list[str]:
        across = list(self.answer_rows)
        down = ["".join(row[c] for row in self.answer_rows) for c in range(SIZE)]
        return across + down


def load_suite(path: str) -> list[CrosswordPuzzle]:
    """Load and validate a suite file; errors name the offending entry."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PuzzleError("malformed_syntax", f"invalid suite JSON: {exc}") from exc
    if not isinstance(data, list):
        raise PuzzleError("malformed_syntax", "suite file must be a JSON array")
    puzzles = []
    for i, entry in enumerate(data):
        try:
            puzzles.append(
                CrosswordPuzzle(
                    clues_across=tuple(entry["clues_across"]),
                    clues_down=tuple(entry["clues_down"]),
                    answer_rows=tuple(str(r).upper() for r in entry["answer_rows"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise PuzzleError(
                "malformed_entry", f"entry {i}: missing or bad field {exc}"
            ) from exc
        except PuzzleError as exc:
            raise PuzzleError("malformed_entry", f"entry {i}: {exc.message}") from exc
    return puzzles


def parse_candidate_grid(text: str) -> tuple[str, ...]:
    """Parse a candidate grid: 5 lines of 5 letters, case/whitespace tolerant."""
    rows = []
    for line in text.splitlines():
        compact = "".join(ch for ch in line if ch.isalpha())
        if compact:
            rows.append(compact.upper())
    if len(rows) != SIZE or any(len(r) != SIZE for r in rows):
        raise PuzzleError("bad_answer", "candidate must be 5 rows of 5 letters")
    return tuple(rows)


def score(p: CrosswordPuzzle, candidate: tuple[str, ...]) -> dict:
    """{'letter_acc', 'word_acc', 'success'} against the answer grid."""
    if len(candidate) != SIZE or any(len(r) != SIZE for r in candidate):
        raise PuzzleError("bad_answer", "candidate grid must be 5x5")
    cand = tuple(r.upper() for r in candidate)
    letters = sum(
        1
        for r in range(SIZE)
        for c in range(SIZE)
        if cand[r][c] == p.answer_rows[r][c]
    )
    cand_words = list(cand) + ["".join(row[c] for row in cand) for c in range(SIZE)]
    words = sum(1 for got, want in zip(cand_words, p.words()) if got == want)
    return {
        "letter_acc": letters / (SIZE * SIZE),
        "word_acc": words / (2 * SIZE),
        "success": 1 if letters == SIZE * SIZE else 0,
    }


def to_instance(p: CrosswordPuzzle, index: int) -> PuzzleInstance:
    return PuzzleInstance(
        id=f"crossword5-{index}",
        kind=TaskKind.CROSSWORD5,
        payload={
            "clues_across": list(p.clues_across),
            "clues_down": list(p.clues_down),
        },
        solutions=SolutionSet([p.canonical()]),
        meta=PuzzleMeta(solution_count=1, seed=0, stage="eval"),
    )
