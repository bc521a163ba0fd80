"""Training-dataset builder.

Default spec: 720 6x6 Sudoku and 720 alphametic instances, split 540
stage-1 / 180 stage-2 per task (stage totals 1080/360, grand total 1440).
Alphametic instances are balanced across solution counts 1-4 within each
stage: equal quarters, remainder assigned to the lowest counts first.
Builds are byte-reproducible from (seed, spec).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import alphametic, sudoku
from .core import (
    PuzzleError,
    PuzzleInstance,
    PuzzleMeta,
    SolutionSet,
    TaskKind,
    serialize_instance,
)
from .rng import child_seed

DEFAULT_COUNTS = {
    TaskKind.SUDOKU6: {"1": 540, "2": 180},
    TaskKind.ALPHAMETIC: {"1": 540, "2": 180},
}


@dataclass(frozen=True)
class DatasetSpec:
    seed: int = 0
    counts: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_COUNTS.items()})
    sudoku_clue_range: tuple[int, int] = sudoku.DEFAULT_CLUE_RANGE[6]
    alphametic_shape: dict = field(default_factory=lambda: dict(alphametic.DEFAULT_SHAPE))
    retry_budget: int = 200_000


def alphametic_buckets(count: int) -> dict[int, int]:
    """Equal quarters over solution counts 1..4, remainder to lowest first."""
    base, rem = divmod(count, 4)
    return {t: base + (1 if t <= rem else 0) for t in range(1, 5)}


def _gen_sudoku6(spec: DatasetSpec, stage: str, count: int) -> list:
    out = []
    for i in range(count):
        seed = child_seed(spec.seed, "dataset", "sudoku6", stage, i)
        out.append(sudoku.generate(6, seed, spec.sudoku_clue_range, stage=stage))
    return out


def _gen_alphametic(spec: DatasetSpec, stage: str, count: int) -> list:
    """Fill the four solution-count buckets by scanning seeded candidates."""
    need = alphametic_buckets(count)
    got = {t: [] for t in need}
    attempt = 0
    while any(len(got[t]) < need[t] for t in need):
        if attempt >= spec.retry_budget:
            achieved = {t: len(v) for t, v in got.items()}
            raise PuzzleError(
                "retry_exhausted",
                f"alphametic stage {stage}: wanted {need}, achieved {achieved} "
                f"after {spec.retry_budget} attempts",
            )
        seed = child_seed(spec.seed, "dataset", "alphametic", stage, attempt)
        attempt += 1
        # Probe one candidate equation and bucket it by whatever solution
        # count it turns out to have; cheaper than per-target rejection.
        rng = random.Random(seed)
        p = alphametic._random_puzzle(
            rng,
            spec.alphametic_shape["addend_count"],
            spec.alphametic_shape["word_len"],
        )
        if p is None:
            continue
        sols = alphametic.enumerate_solutions(p, limit=5)
        t = len(sols)
        if t not in need or len(got[t]) >= need[t]:
            continue
        got[t].append(
            PuzzleInstance(
                id=f"alphametic-{seed}",
                kind=TaskKind.ALPHAMETIC,
                payload={"addends": list(p.addends), "sum_word": p.sum_word},
                solutions=sols,
                meta=PuzzleMeta(solution_count=t, seed=seed, stage=stage),
            )
        )
    out = []
    for t in sorted(got):
        out.extend(got[t])
    return out


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    counts: dict
    files: dict
    total: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "counts": self.counts,
                "files": self.files,
                "total": self.total,
            },
            sort_keys=True,
            indent=2,
        ) + "\n"


def build_training_dataset(spec: DatasetSpec, out_dir: str | Path) -> DatasetManifest:
    """Emit JSONL dataset files plus a manifest under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    counts: dict[str, dict[str, int]] = {}
    total = 0
    for kind in sorted(spec.counts, key=lambda k: k.value):
        per_stage = spec.counts[kind]
        counts[kind.value] = {}
        for stage in sorted(per_stage):
            n = int(per_stage[stage])
            if n < 0:
                raise PuzzleError("invalid_spec", "counts must be nonnegative")
            counts[kind.value][stage] = n
            if n == 0:
                continue
            if kind == TaskKind.SUDOKU6:
                instances = _gen_sudoku6(spec, stage, n)
            elif kind == TaskKind.ALPHAMETIC:
                instances = _gen_alphametic(spec, stage, n)
            else:
                raise PuzzleError("invalid_spec", f"unsupported training task {kind}")
            name = f"{kind.value.lower()}_stage{stage}.jsonl"
            path = out / name
            with open(path, "w", encoding="utf-8") as fh:
                for inst in instances:
                    fh.write(serialize_instance(inst) + "\n")
            files[f"{kind.value}/{stage}"] = name
            total += n
    manifest = DatasetManifest(seed=spec.seed, counts=counts, files=files, total=total)
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest
