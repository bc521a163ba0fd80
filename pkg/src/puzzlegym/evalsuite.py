"""Benchmark suite builder, scorer, and thinking-budget sweep.

Suite structure mirrors the benchmark layout this package targets:
50 generated 6x6 Sudoku, 200 alphametics (50 per solution count 1-4),
140 knights-and-knaves (20 per person count 2-8), 160 Poker-24 and 160
Make-24 hands (40 per solution count 1-4); 5x5 crossword and 9x9 Sudoku
suites are loaded from external files and validated.

Scoring has two labeled modes: strict (exact set equality, matching the
training reward) and recall (per-solution credit |S&Y|/|Y| behind the
format gate). Reports aggregate per bucket with an unweighted average.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import alphametic, crossword, game24, knk, sudoku
from .core import (
    PuzzleError,
    PuzzleInstance,
    TaskKind,
    parse_instance,
    serialize_instance,
)
from .reward import (
    DEFAULT_PARAMS,
    DEFAULT_TAGS,
    extract_solutions,
    format_validity,
    parse_response,
    partial_credit,
)
from .rng import child_seed

DEFAULT_BUDGETS = {
    TaskKind.KNIGHTS_KNAVES: 8_192,
    TaskKind.SUDOKU9: 32_768,
}
FALLBACK_BUDGET = 16_384

SUITE_SIZES = {
    TaskKind.SUDOKU6: {"total": 50},
    TaskKind.ALPHAMETIC: {"per_bucket": 50, "buckets": [1, 2, 3, 4]},
    TaskKind.KNIGHTS_KNAVES: {"per_bucket": 20, "buckets": [2, 3, 4, 5, 6, 7, 8]},
    TaskKind.POKER24: {"per_bucket": 40, "buckets": [1, 2, 3, 4]},
    TaskKind.MAKE24: {"per_bucket": 40, "buckets": [1, 2, 3, 4]},
}


def default_budget(kind: TaskKind) -> int:
    return DEFAULT_BUDGETS.get(kind, FALLBACK_BUDGET)


def bucket_key(p: PuzzleInstance) -> str:
    """Solution count for multi-solution tasks, person count for K&K,
    'all' for single-bucket tasks."""
    if p.kind in (TaskKind.ALPHAMETIC, TaskKind.POKER24, TaskKind.MAKE24):
        return f"{p.meta.solution_count} sol"
    if p.kind == TaskKind.KNIGHTS_KNAVES:
        return f"{p.payload['n_persons']} ppl"
    return "all"


def build_suites(seed: int, out_dir: str | Path) -> dict[str, str]:
    """Generate the self-generated suites as JSONL files; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}

    def write(kind: TaskKind, instances: list[PuzzleInstance]) -> None:
        name = f"suite_{kind.value.lower()}.jsonl"
        with open(out / name, "w", encoding="utf-8") as fh:
            for inst in instances:
                fh.write(serialize_instance(inst) + "\n")
        files[kind.value] = name

    instances = [
        sudoku.generate(6, child_seed(seed, "suite", "sudoku6", i))
        for i in range(SUITE_SIZES[TaskKind.SUDOKU6]["total"])
    ]
    write(TaskKind.SUDOKU6, instances)

    spec = SUITE_SIZES[TaskKind.ALPHAMETIC]
    instances = [
        alphametic.generate(t, child_seed(seed, "suite", "alphametic", t, i))
        for t in spec["buckets"]
        for i in range(spec["per_bucket"])
    ]
    write(TaskKind.ALPHAMETIC, instances)

    spec = SUITE_SIZES[TaskKind.KNIGHTS_KNAVES]
    instances = [
        knk.generate(n, child_seed(seed, "suite", "knk", n, i))
        for n in spec["buckets"]
        for i in range(spec["per_bucket"])
    ]
    write(TaskKind.KNIGHTS_KNAVES, instances)

    for kind in (TaskKind.POKER24, TaskKind.MAKE24):
        spec = SUITE_SIZES[kind]
        instances = [
            game24.generate(kind, t, child_seed(seed, "suite", kind.value, t, i))
            for t in spec["buckets"]
            for i in range(spec["per_bucket"])
        ]
        write(kind, instances)

    return files


def load_suite(path: str | Path) -> list[PuzzleInstance]:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                instances.append(parse_instance(line))
            except PuzzleError as exc:
                raise PuzzleError(exc.code, f"line {i + 1}: {exc.message}") from exc
    return instances


def load_external_sudoku9(path: str | Path) -> list[PuzzleInstance]:
    """Accept any external 9x9 JSONL suite; every line is validated."""
    instances = load_suite(path)
    for inst in instances:
        if inst.kind != TaskKind.SUDOKU9:
            raise PuzzleError("unknown_kind", f"{inst.id}: expected Sudoku9")
    return instances


def load_external_crossword(path: str | Path) -> list[PuzzleInstance]:
    puzzles = crossword.load_suite(str(path))
    return [crossword.to_instance(p, i) for i, p in enumerate(puzzles)]


@dataclass(frozen=True)
class EvalRow:
    task: str
    buckets: dict[str, float]
    average: float
    metric_mode: str
    budget: int
    n_instances: int
    missing: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def to_markdown(self) -> str:
        lines = []
        for row in self.rows:
            keys = sorted(row.buckets)
            lines.append(f"### {row.task} (metric={row.metric_mode}, budget={row.budget})")
            lines.append("| " + " | ".join(keys + ["Avg."]) + " |")
            lines.append("|" + "---|" * (len(keys) + 1))
            lines.append(
                "| "
                + " | ".join(f"{row.buckets[k]:.3f}" for k in keys)
                + f" | {row.average:.3f} |"
            )
            if row.missing:
                lines.append(f"(missing transcripts: {row.missing})")
            lines.append("")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["task", "metric_mode", "budget", "bucket", "accuracy"])
        for row in self.rows:
            for k in sorted(row.buckets):
                w.writerow([row.task, row.metric_mode, row.budget, k, f"{row.buckets[k]:.6f}"])
            w.writerow([row.task, row.metric_mode, row.budget, "Avg.", f"{row.average:.6f}"])
        return buf.getvalue()


def score_instance(
    inst: PuzzleInstance, transcript: str, metric_mode: str, mode: str = "thinking"
) -> float:
    """Per-instance score: strict = exact-set indicator; recall = |S&Y|/|Y|.
    Both are gated by format validity. Crossword scores per-word."""
    parsed = parse_response(transcript, DEFAULT_TAGS, mode, kind=inst.kind)
    if not format_validity(parsed):
        return 0.0
    extracted = extract_solutions(parsed.answer_text, inst.kind)
    if inst.kind == TaskKind.CROSSWORD5:
        want = next(iter(inst.solutions))
        got = next(iter(extracted))
        rows_want = tuple(want[i * 5 : (i + 1) * 5] for i in range(5))
        rows_got = tuple(got[i * 5 : (i + 1) * 5] for i in range(5))
        p = crossword.CrosswordPuzzle(
            clues_across=tuple(inst.payload["clues_across"]),
            clues_down=tuple(inst.payload["clues_down"]),
            answer_rows=rows_want,
        )
        metrics = crossword.score(p, rows_got)
        return metrics["word_acc"] if metric_mode == "recall" else float(metrics["success"])
    if metric_mode == "strict":
        return 1.0 if extracted == inst.solutions else 0.0
    if metric_mode == "recall":
        return partial_credit(extracted, inst.solutions)
    raise ValueError(f"unknown metric mode {metric_mode!r}")


def score_suite(
    suite: list[PuzzleInstance],
    transcripts: dict[str, str],
    metric_mode: str = "strict",
    budget: int = FALLBACK_BUDGET,
    mode: str = "thinking",
) -> EvalReport:
    """Score one transcript per instance, aggregated per bucket.

    Missing transcripts score 0 and are counted in the report's missing
    flag. The per-task average is the unweighted mean of bucket scores.
    """
    by_task: dict[str, dict[str, list[float]]] = {}
    missing_by_task: dict[str, int] = {}
    for inst in suite:
        task = inst.kind.value
        bucket = bucket_key(inst)
        text = transcripts.get(inst.id)
        if text is None:
            score = 0.0
            missing_by_task[task] = missing_by_task.get(task, 0) + 1
        else:
            score = score_instance(inst, text, metric_mode, mode)
        by_task.setdefault(task, {}).setdefault(bucket, []).append(score)
    rows = []
    for task in sorted(by_task):
        buckets = {
            b: sum(v) / len(v) for b, v in sorted(by_task[task].items())
        }
        avg = sum(buckets.values()) / len(buckets)
        n = sum(len(v) for v in by_task[task].values())
        rows.append(
            EvalRow(
                task=task,
                buckets=buckets,
                average=avg,
                metric_mode=metric_mode,
                budget=budget,
                n_instances=n,
                missing=missing_by_task.get(task, 0),
            )
        )
    return EvalReport(rows=tuple(rows))


def budget_sweep(
    suite: list[PuzzleInstance],
    budgets: list[int],
    sampler,
    metric_mode: str = "strict",
) -> list[tuple[int, EvalReport]]:
    """One score_suite run per budget with identical prompts and seeds.

    `sampler(suite, budget) -> {puzzle_id: transcript}` is supplied by the
    caller (typically a rollout_harness closure), so stored transcripts
    can be swept without endpoint access.
    """
    if len(budgets) < 2:
        raise ValueError("a sweep needs at least 2 budgets")
    out = []
    for budget in budgets:
        transcripts = sampler(suite, budget)
        out.append((budget, score_suite(suite, transcripts, metric_mode, budget)))
    return out
