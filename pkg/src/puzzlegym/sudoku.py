"""Sudoku environment: 6x6 and 9x9 grids, counting solver, generator.

6x6 boxes are 2 rows x 3 columns; 9x9 boxes are 3x3. The solver is
depth-first backtracking over the most-constrained empty cell with
deterministic tie-break by (row, col) and ascending digits, so oracle
output order is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import PuzzleError, PuzzleInstance, PuzzleMeta, SolutionSet, TaskKind
from .rng import child_rng

BOX_SHAPE = {6: (2, 3), 9: (3, 3)}

DEFAULT_CLUE_RANGE = {6: (14, 20), 9: (28, 34)}


@dataclass(frozen=True)
class SudokuGrid:
    size: int
    cells: tuple[int, ...]  # row-major, 0 = empty

    def __post_init__(self):
        if self.size not in BOX_SHAPE:
            raise PuzzleError("invalid_grid", f"unsupported size {self.size}")
        if len(self.cells) != self.size * self.size:
            raise PuzzleError(
                "invalid_grid",
                f"expected {self.size * self.size} cells, got {len(self.cells)}",
            )
        for i, v in enumerate(self.cells):
            if not 0 <= v <= self.size:
                raise PuzzleError(
                    "invalid_grid",
                    f"cell ({i // self.size},{i % self.size}) value {v} out of range",
                )
        bad = _first_conflict(self.size, self.cells)
        if bad is not None:
            r, c = bad
            raise PuzzleError(
                "invalid_grid", f"duplicate value involving cell ({r},{c})"
            )

    def at(self, r: int, c: int) -> int:
        return self.cells[r * self.size + c]

    def is_complete(self) -> bool:
        return 0 not in self.cells

    def canonical(self) -> str:
        """Row-major digit concatenation; the canonical solution string."""
        return "".join(str(v) for v in self.cells)

    def rows(self) -> list[list[int]]:
        n = self.size
        return [list(self.cells[r * n : (r + 1) * n]) for r in range(n)]


def _box_index(size: int, r: int, c: int) -> int:
    br, bc = BOX_SHAPE[size]
    return (r // br) * (size // bc) + (c // bc)


def _first_conflict(size: int, cells) -> tuple[int, int] | None:
    rows = [set() for _ in range(size)]
    cols = [set() for _ in range(size)]
    boxes = [set() for _ in range(size)]
    for r in range(size):
        for c in range(size):
            v = cells[r * size + c]
            if v == 0:
                continue
            b = _box_index(size, r, c)
            if v in rows[r] or v in cols[c] or v in boxes[b]:
                return (r, c)
            rows[r].add(v)
            cols[c].add(v)
            boxes[b].add(v)
    return None


def count_solutions(g: SudokuGrid, limit: int = 2) -> dict:
    """Count completions of g up to `limit`.

    Returns {"count", "solutions", "truncated"}; truncated is set iff the
    true solution count exceeds limit.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    n = g.size
    cells = list(g.cells)
    rows = [set() for _ in range(n)]
    cols = [set() for _ in range(n)]
    boxes = [set() for _ in range(n)]
    for r in range(n):
        for c in range(n):
            v = cells[r * n + c]
            if v:
                rows[r].add(v)
                cols[c].add(v)
                boxes[_box_index(n, r, c)].add(v)

    digits = range(1, n + 1)
    solutions: list[SudokuGrid] = []
    overflow = False

    def pick_cell() -> tuple[int, int, list[int]] | None:
        best = None
        for r in range(n):
            for c in range(n):
                if cells[r * n + c]:
                    continue
                b = _box_index(n, r, c)
                cand = [
                    d
                    for d in digits
                    if d not in rows[r] and d not in cols[c] and d not in boxes[b]
                ]
                if best is None or len(cand) < len(best[2]):
                    best = (r, c, cand)
                    if len(cand) <= 1:
                        return best
        return best

    def dfs() -> bool:
        """Returns True when the search should stop (limit exceeded)."""
        spot = pick_cell()
        if spot is None:
            if len(solutions) < limit:
                solutions.append(SudokuGrid(n, tuple(cells)))
                return False
            return True
        r, c, cand = spot
        b = _box_index(n, r, c)
        for d in cand:
            cells[r * n + c] = d
            rows[r].add(d)
            cols[c].add(d)
            boxes[b].add(d)
            stop = dfs()
            cells[r * n + c] = 0
            rows[r].discard(d)
            cols[c].discard(d)
            boxes[b].discard(d)
            if stop:
                return True
        return False

    overflow = dfs()
    return {"count": len(solutions), "solutions": solutions, "truncated": overflow}


def _random_complete_grid(size: int, rng) -> SudokuGrid:
    """Fill an empty grid with seeded digit-order backtracking."""
    n = size
    cells = [0] * (n * n)
    rows = [set() for _ in range(n)]
    cols = [set() for _ in range(n)]
    boxes = [set() for _ in range(n)]
    order = list(range(n * n))

    def fill(idx: int) -> bool:
        if idx == n * n:
            return True
        pos = order[idx]
        r, c = divmod(pos, n)
        b = _box_index(n, r, c)
        digits = list(range(1, n + 1))
        rng.shuffle(digits)
        for d in digits:
            if d in rows[r] or d in cols[c] or d in boxes[b]:
                continue
            cells[pos] = d
            rows[r].add(d)
            cols[c].add(d)
            boxes[b].add(d)
            if fill(idx + 1):
                return True
            cells[pos] = 0
            rows[r].remove(d)
            cols[c].remove(d)
            boxes[b].remove(d)
        return False

    if not fill(0):  # a fresh grid always fills
        raise PuzzleError("generation_failed", "could not fill grid")
    return SudokuGrid(n, tuple(cells))


def generate(
    size: int,
    seed: int,
    clue_range: tuple[int, int] | None = None,
    stage: str = "eval",
) -> PuzzleInstance:
    """Generate a unique-solution puzzle with a clue count in clue_range.

    Strategy: complete a random valid grid, then remove clues in seeded
    random order while uniqueness holds and the clue count stays above
    the range minimum.
    """
    if size not in BOX_SHAPE:
        raise PuzzleError("invalid_grid", f"unsupported size {size}")
    lo, hi = clue_range if clue_range is not None else DEFAULT_CLUE_RANGE[size]
    total = size * size
    if not (0 <= lo <= hi <= total):
        raise PuzzleError("infeasible_shape", f"clue range ({lo},{hi}) invalid for size {size}")
    rng = child_rng(seed, "sudoku", size)
    for attempt in range(100):
        full = _random_complete_grid(size, rng)
        cells = list(full.cells)
        positions = list(range(total))
        rng.shuffle(positions)
        clues = total
        for pos in positions:
            if clues <= lo:
                break
            saved = cells[pos]
            cells[pos] = 0
            res = count_solutions(SudokuGrid(size, tuple(cells)), limit=2)
            if res["count"] == 1:
                clues -= 1
            else:
                cells[pos] = saved
        if lo <= clues <= hi:
            grid = SudokuGrid(size, tuple(cells))
            kind = TaskKind.SUDOKU6 if size == 6 else TaskKind.SUDOKU9
            return PuzzleInstance(
                id=f"{kind.value.lower()}-{seed}",
                kind=kind,
                payload={"size": size, "cells": list(grid.cells)},
                solutions=SolutionSet([full.canonical()]),
                meta=PuzzleMeta(
                    solution_count=1,
                    seed=seed,
                    stage=stage,
                    difficulty=(f"clues={clues}",),
                ),
            )
    raise PuzzleError(
        "retry_exhausted",
        f"no puzzle with clue count in [{lo},{hi}] after 100 attempts (size {size})",
    )


def verify(g: SudokuGrid, candidate: SudokuGrid) -> bool:
    """True iff candidate completes g: full, valid, and agrees on every clue."""
    if g.size != candidate.size:
        raise PuzzleError("size_mismatch", f"{g.size} vs {candidate.size}")
    if not candidate.is_complete():
        return False
    for i, v in enumerate(g.cells):
        if v and candidate.cells[i] != v:
            return False
    return True  # candidate constraints hold by SudokuGrid construction


def grid_from_payload(payload: dict) -> SudokuGrid:
    return SudokuGrid(int(payload["size"]), tuple(int(v) for v in payload["cells"]))


def parse_answer_grid(text: str, size: int) -> SudokuGrid:
    """Parse a model answer: size lines of size digits, whitespace tolerant."""
    digits = [ch for ch in text if ch.isdigit()]
    if len(digits) != size * size:
        raise PuzzleError(
            "bad_answer", f"expected {size * size} digits, got {len(digits)}"
        )
    return SudokuGrid(size, tuple(int(d) for d in digits))
