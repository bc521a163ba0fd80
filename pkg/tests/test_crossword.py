import json

import pytest

from puzzlegym.core import PuzzleError, TaskKind
from puzzlegym.crossword import (
    CrosswordPuzzle,
    load_suite,
    parse_candidate_grid,
    score,
    to_instance,
)

ROWS = ("SALTS", "ADORE", "LODGE", "TRGED", "SEEDS")


def make_puzzle(rows=ROWS):
    return CrosswordPuzzle(
        clues_across=tuple(f"across {i}" for i in range(5)),
        clues_down=tuple(f"down {i}" for i in range(5)),
        answer_rows=rows,
    )


class TestPuzzle:
    def test_canonical_is_row_major(self):
        assert make_puzzle().canonical() == "".join(ROWS)

    def test_words_order(self):
        w = make_puzzle().words()
        assert w[:5] == list(ROWS)
        assert w[5] == "SALTS"  # first column of this symmetric grid

    def test_rejects_short_row(self):
        with pytest.raises(PuzzleError) as e:
            make_puzzle(rows=("SALT", "ADORE", "LODGE", "TRGED", "SEEDS"))
        assert e.value.code == "invalid_puzzle"

    def test_rejects_lowercase(self):
        with pytest.raises(PuzzleError):
            make_puzzle(rows=("salts",) + ROWS[1:])

    def test_rejects_wrong_clue_count(self):
        with pytest.raises(PuzzleError):
            CrosswordPuzzle(("a",) * 4, ("d",) * 5, ROWS)


class TestScore:
    def test_perfect(self):
        s = score(make_puzzle(), ROWS)
        assert s == {"letter_acc": 1.0, "word_acc": 1.0, "success": 1}

    def test_single_letter_wrong(self):
        cand = ("XALTS",) + ROWS[1:]
        s = score(make_puzzle(), cand)
        assert s["letter_acc"] == 24 / 25
        # one across word and one down word are now wrong
        assert s["word_acc"] == 8 / 10
        assert s["success"] == 0

    def test_case_insensitive(self):
        s = score(make_puzzle(), tuple(r.lower() for r in ROWS))
        assert s["success"] == 1

    def test_bad_shape(self):
        with pytest.raises(PuzzleError):
            score(make_puzzle(), ROWS[:4])


class TestParseCandidate:
    def test_whitespace_and_case(self):
        text = "\n".join("  " + " ".join(r.lower()) for r in ROWS)
        assert parse_candidate_grid(text) == ROWS

    def test_blank_lines_ignored(self):
        text = "\n\n" + "\n\n".join(ROWS) + "\n"
        assert parse_candidate_grid(text) == ROWS

    def test_wrong_rows(self):
        with pytest.raises(PuzzleError):
            parse_candidate_grid("\n".join(ROWS[:4]))


class TestLoadSuite:
    def entry(self):
        return {
            "clues_across": [f"a{i}" for i in range(5)],
            "clues_down": [f"d{i}" for i in range(5)],
            "answer_rows": list(ROWS),
        }

    def test_round_trip(self, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(json.dumps([self.entry(), self.entry()]))
        puzzles = load_suite(str(path))
        assert len(puzzles) == 2
        assert puzzles[0].answer_rows == ROWS

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(PuzzleError) as e:
            load_suite(str(path))
        assert e.value.code == "malformed_syntax"

    def test_bad_entry_named(self, tmp_path):
        entries = [self.entry(), self.entry()]
        del entries[1]["answer_rows"]
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(entries))
        with pytest.raises(PuzzleError) as e:
            load_suite(str(path))
        assert e.value.code == "malformed_entry"
        assert "entry 1" in e.value.message

    def test_bad_grid_named(self, tmp_path):
        entries = [self.entry()]
        entries[0]["answer_rows"][2] = "SHORT2"
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(entries))
        with pytest.raises(PuzzleError) as e:
            load_suite(str(path))
        assert e.value.code == "malformed_entry"


def test_to_instance():
    inst = to_instance(make_puzzle(), 7)
    assert inst.kind == TaskKind.CROSSWORD5
    assert inst.id == "crossword5-7"
    assert inst.solutions.members == frozenset(["".join(ROWS)])
