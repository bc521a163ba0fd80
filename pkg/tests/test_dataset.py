import json

import pytest

from puzzlegym import alphametic, sudoku
from puzzlegym.core import PuzzleError, TaskKind, parse_instance
from puzzlegym.dataset import (
    DatasetSpec,
    alphametic_buckets,
    build_training_dataset,
)


def small_spec(seed=0):
    return DatasetSpec(
        seed=seed,
        counts={
            TaskKind.SUDOKU6: {"1": 6, "2": 3},
            TaskKind.ALPHAMETIC: {"1": 6, "2": 5},
        },
    )


class TestBuckets:
    def test_even_split(self):
        assert alphametic_buckets(8) == {1: 2, 2: 2, 3: 2, 4: 2}

    def test_remainder_to_lowest_counts(self):
        assert alphametic_buckets(6) == {1: 2, 2: 2, 3: 1, 4: 1}
        assert alphametic_buckets(5) == {1: 2, 2: 1, 3: 1, 4: 1}
        assert alphametic_buckets(7) == {1: 2, 2: 2, 3: 2, 4: 1}

    def test_totals(self):
        for n in range(0, 40):
            assert sum(alphametic_buckets(n).values()) == n


class TestBuild:
    def test_files_counts_and_manifest(self, tmp_path):
        manifest = build_training_dataset(small_spec(), tmp_path)
        assert manifest.total == 20
        assert manifest.counts == {
            "Sudoku6": {"1": 6, "2": 3},
            "Alphametic": {"1": 6, "2": 5},
        }
        for key, name in manifest.files.items():
            path = tmp_path / name
            kind_name, stage = key.split("/")
            lines = [l for l in path.read_text().splitlines() if l.strip()]
            assert len(lines) == manifest.counts[kind_name][stage]
            for line in lines:
                inst = parse_instance(line)
                assert inst.kind.value == kind_name
                assert inst.meta.stage == stage
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["total"] == 20

    def test_instances_verify_against_engines(self, tmp_path):
        build_training_dataset(small_spec(), tmp_path)
        for line in (tmp_path / "sudoku6_stage1.jsonl").read_text().splitlines():
            inst = parse_instance(line)
            grid = sudoku.grid_from_payload(inst.payload)
            res = sudoku.count_solutions(grid, limit=2)
            assert res["count"] == 1
            assert {g.canonical() for g in res["solutions"]} == inst.solutions.members
        for line in (tmp_path / "alphametic_stage2.jsonl").read_text().splitlines():
            inst = parse_instance(line)
            p = alphametic.puzzle_from_payload(inst.payload)
            assert alphametic.enumerate_solutions(p) == inst.solutions

    def test_alphametic_bucket_counts(self, tmp_path):
        build_training_dataset(small_spec(), tmp_path)
        counts = {}
        for line in (tmp_path / "alphametic_stage1.jsonl").read_text().splitlines():
            inst = parse_instance(line)
            counts[inst.meta.solution_count] = counts.get(inst.meta.solution_count, 0) + 1
        assert counts == alphametic_buckets(6)

    def test_byte_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        build_training_dataset(small_spec(seed=7), a)
        build_training_dataset(small_spec(seed=7), b)
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        build_training_dataset(small_spec(seed=1), a)
        build_training_dataset(small_spec(seed=2), b)
        assert (a / "sudoku6_stage1.jsonl").read_bytes() != (
            b / "sudoku6_stage1.jsonl"
        ).read_bytes()

    def test_unique_ids(self, tmp_path):
        build_training_dataset(small_spec(), tmp_path)
        ids = []
        for f in tmp_path.glob("*.jsonl"):
            for line in f.read_text().splitlines():
                ids.append(parse_instance(line).id)
        assert len(ids) == len(set(ids))

    def test_negative_count_rejected(self, tmp_path):
        spec = DatasetSpec(counts={TaskKind.SUDOKU6: {"1": -1}})
        with pytest.raises(PuzzleError):
            build_training_dataset(spec, tmp_path)

    def test_unsupported_kind_rejected(self, tmp_path):
        spec = DatasetSpec(counts={TaskKind.MAKE24: {"1": 1}})
        with pytest.raises(PuzzleError) as e:
            build_training_dataset(spec, tmp_path)
        assert e.value.code == "invalid_spec"

    def test_retry_budget_surfaces(self, tmp_path):
        spec = DatasetSpec(
            counts={TaskKind.ALPHAMETIC: {"1": 4}}, retry_budget=2
        )
        with pytest.raises(PuzzleError) as e:
            build_training_dataset(spec, tmp_path)
        assert e.value.code == "retry_exhausted"


def test_default_spec_shape():
    spec = DatasetSpec()
    assert spec.counts[TaskKind.SUDOKU6] == {"1": 540, "2": 180}
    assert spec.counts[TaskKind.ALPHAMETIC] == {"1": 540, "2": 180}
