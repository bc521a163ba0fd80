import pytest

from puzzlegym import sudoku
from puzzlegym.core import PuzzleError
from puzzlegym.sudoku import SudokuGrid, count_solutions, generate, verify

# A completed valid 6x6 grid (2x3 boxes), built by hand.
FULL6 = SudokuGrid(
    6,
    (
        1, 2, 3, 4, 5, 6,
        4, 5, 6, 1, 2, 3,
        2, 3, 1, 5, 6, 4,
        5, 6, 4, 2, 3, 1,
        3, 1, 2, 6, 4, 5,
        6, 4, 5, 3, 1, 2,
    ),
)


class TestGridInvariants:
    def test_duplicate_in_row_rejected(self):
        cells = [0] * 36
        cells[0] = 5
        cells[3] = 5
        with pytest.raises(PuzzleError) as e:
            SudokuGrid(6, tuple(cells))
        assert e.value.code == "invalid_grid"
        assert "(0,3)" in e.value.message

    def test_duplicate_in_box_rejected(self):
        cells = [0] * 36
        cells[0] = 2       # (0,0)
        cells[6 + 1] = 2   # (1,1), same 2x3 box
        with pytest.raises(PuzzleError):
            SudokuGrid(6, tuple(cells))

    def test_value_out_of_range(self):
        cells = [0] * 36
        cells[10] = 7
        with pytest.raises(PuzzleError):
            SudokuGrid(6, tuple(cells))


class TestCountSolutions:
    def test_full_grid_counts_itself(self):
        res = count_solutions(FULL6, limit=2)
        assert res["count"] == 1
        assert not res["truncated"]
        assert res["solutions"][0] == FULL6

    def test_empty_grid_truncates_at_limit(self):
        res = count_solutions(SudokuGrid(6, (0,) * 36), limit=2)
        assert res["count"] == 2
        assert res["truncated"]

    def test_solutions_complete_the_givens(self):
        cells = list(FULL6.cells)
        for i in range(0, 36, 3):
            cells[i] = 0
        res = count_solutions(SudokuGrid(6, tuple(cells)), limit=10)
        assert res["count"] >= 1
        for sol in res["solutions"]:
            assert verify(SudokuGrid(6, tuple(cells)), sol)


class TestGenerate:
    def test_6x6_unique_solution(self):
        inst = generate(6, seed=7, clue_range=(14, 20))
        grid = sudoku.grid_from_payload(inst.payload)
        res = count_solutions(grid, limit=2)
        assert res["count"] == 1
        assert res["solutions"][0].canonical() in inst.solutions

    def test_9x9_unique_solution(self):
        inst = generate(9, seed=0, clue_range=(28, 34))
        grid = sudoku.grid_from_payload(inst.payload)
        assert count_solutions(grid, limit=2)["count"] == 1

    def test_full_grid_clue_range(self):
        inst = generate(6, seed=3, clue_range=(36, 36))
        grid = sudoku.grid_from_payload(inst.payload)
        assert grid.is_complete()
        assert count_solutions(grid, limit=2)["count"] == 1
        assert grid.canonical() in inst.solutions

    def test_deterministic(self):
        a = generate(6, seed=11)
        b = generate(6, seed=11)
        assert a == b

    def test_clue_count_in_range(self):
        inst = generate(6, seed=5, clue_range=(14, 20))
        clues = sum(1 for v in inst.payload["cells"] if v)
        assert 14 <= clues <= 20


class TestVerify:
    def test_unique_completion_verifies(self):
        inst = generate(6, seed=2)
        grid = sudoku.grid_from_payload(inst.payload)
        sol = count_solutions(grid, limit=2)["solutions"][0]
        assert verify(grid, sol)

    def test_overwritten_clue_fails(self):
        inst = generate(6, seed=2)
        grid = sudoku.grid_from_payload(inst.payload)
        sol = count_solutions(grid, limit=2)["solutions"][0]
        # Relabel two digits throughout the solution: still a valid grid,
        # but it now disagrees with every clue carrying those digits.
        a = next(v for v in grid.cells if v)
        b = a % 6 + 1
        mapping = {a: b, b: a}
        cells = tuple(mapping.get(v, v) for v in sol.cells)
        mutated = SudokuGrid(6, cells)
        assert not verify(grid, mutated)

    def test_incomplete_candidate_fails(self):
        inst = generate(6, seed=2)
        grid = sudoku.grid_from_payload(inst.payload)
        assert not verify(grid, grid)  # puzzle itself has empties

    def test_size_mismatch(self):
        with pytest.raises(PuzzleError) as e:
            verify(FULL6, SudokuGrid(9, (0,) * 81))
        assert e.value.code == "size_mismatch"

    def test_verified_candidate_is_enumerated(self):
        inst = generate(6, seed=13)
        grid = sudoku.grid_from_payload(inst.payload)
        sols = count_solutions(grid, limit=100)["solutions"]
        for s in sols:
            assert verify(grid, s)


def test_parse_answer_grid_whitespace_tolerant():
    text = "\n".join(" ".join(str(v) for v in row) for row in FULL6.rows())
    assert sudoku.parse_answer_grid(text, 6) == FULL6


def test_removing_any_clue_keeps_at_least_one_solution():
    inst = generate(6, seed=21)
    cells = list(sudoku.grid_from_payload(inst.payload).cells)
    for i, v in enumerate(cells):
        if not v:
            continue
        cells[i] = 0
        assert count_solutions(SudokuGrid(6, tuple(cells)), limit=1)["count"] >= 1
        cells[i] = v
