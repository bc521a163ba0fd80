"""Command-line entry point.

One binary, subcommands for generation, solving, verification, grading,
dataset building, rollouts, toy training, evaluation, and budget sweeps.
Machine-readable output goes to stdout, diagnostics to stderr. Exit
codes: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import alphametic, dataset, evalsuite, game24, knk, reward, rl, rollout, sudoku
from .core import PuzzleError, TaskKind, parse_instance, serialize_instance

GEN_KINDS = {
    "sudoku6": TaskKind.SUDOKU6,
    "sudoku9": TaskKind.SUDOKU9,
    "alphametic": TaskKind.ALPHAMETIC,
    "poker24": TaskKind.POKER24,
    "make24": TaskKind.MAKE24,
    "knk": TaskKind.KNIGHTS_KNAVES,
}


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def cmd_gen(args) -> int:
    kind = GEN_KINDS[args.kind]
    if kind in (TaskKind.SUDOKU6, TaskKind.SUDOKU9):
        size = 6 if kind == TaskKind.SUDOKU6 else 9
        clue_range = None
        if args.clue_min is not None or args.clue_max is not None:
            lo = args.clue_min if args.clue_min is not None else sudoku.DEFAULT_CLUE_RANGE[size][0]
            hi = args.clue_max if args.clue_max is not None else sudoku.DEFAULT_CLUE_RANGE[size][1]
            clue_range = (lo, hi)
        inst = sudoku.generate(size, args.seed, clue_range)
    elif kind == TaskKind.ALPHAMETIC:
        inst = alphametic.generate(args.target_count, args.seed)
    elif kind in (TaskKind.POKER24, TaskKind.MAKE24):
        inst = game24.generate(kind, args.target_count, args.seed)
    else:
        inst = knk.generate(args.n_persons, args.seed)
    sys.stdout.write(serialize_instance(inst) + "\n")
    return 0


def _solve_payload(kind: TaskKind, payload: dict) -> list[str]:
    if kind in (TaskKind.SUDOKU6, TaskKind.SUDOKU9):
        grid = sudoku.grid_from_payload(payload)
        res = sudoku.count_solutions(grid, limit=1000)
        return sorted(g.canonical() for g in res["solutions"])
    if kind == TaskKind.ALPHAMETIC:
        return alphametic.enumerate_solutions(
            alphametic.puzzle_from_payload(payload)
        ).sorted()
    if kind in (TaskKind.POKER24, TaskKind.MAKE24):
        return game24.enumerate_solutions(game24.hand_from_payload(payload)).sorted()
    if kind == TaskKind.KNIGHTS_KNAVES:
        return knk.solve(knk.puzzle_from_payload(payload)).sorted()
    raise PuzzleError("unknown_kind", f"cannot solve {kind}")


def cmd_solve(args) -> int:
    kind = GEN_KINDS[args.kind]
    payload = json.loads(args.payload)
    sols = _solve_payload(kind, payload)
    _emit({"kind": kind.value, "solutions": sols, "count": len(sols)})
    return 0


def cmd_verify(args) -> int:
    kind = GEN_KINDS[args.kind]
    payload = json.loads(args.payload)
    if kind in (TaskKind.SUDOKU6, TaskKind.SUDOKU9):
        grid = sudoku.grid_from_payload(payload)
        cand = sudoku.parse_answer_grid(args.candidate, grid.size)
        ok = sudoku.verify(grid, cand)
    elif kind == TaskKind.ALPHAMETIC:
        p = alphametic.puzzle_from_payload(payload)
        ok = alphametic.verify(p, alphametic.parse_assignment(args.candidate, p.letters()))
    elif kind in (TaskKind.POKER24, TaskKind.MAKE24):
        res = game24.verify_expression(game24.hand_from_payload(payload), args.candidate)
        _emit(res)
        return 0
    else:
        p = knk.puzzle_from_payload(payload)
        ok = knk.verify(p, knk.parse_roles(args.candidate, p.n_persons))
    _emit({"valid": bool(ok)})
    return 0


def cmd_grade(args) -> int:
    inst = parse_instance(Path(args.puzzle).read_text(encoding="utf-8").strip())
    text = Path(args.transcript).read_text(encoding="utf-8")
    result = reward.grade_transcript(text, inst, mode=args.mode)
    _emit(result.to_record())
    return 0


def cmd_dataset(args) -> int:
    counts = dict(dataset.DEFAULT_COUNTS)
    if args.sudoku6_stage1 is not None or args.sudoku6_stage2 is not None:
        counts[TaskKind.SUDOKU6] = {
            "1": args.sudoku6_stage1 or 0,
            "2": args.sudoku6_stage2 or 0,
        }
    if args.alphametic_stage1 is not None or args.alphametic_stage2 is not None:
        counts[TaskKind.ALPHAMETIC] = {
            "1": args.alphametic_stage1 or 0,
            "2": args.alphametic_stage2 or 0,
        }
    spec = dataset.DatasetSpec(seed=args.seed, counts=counts)
    manifest = dataset.build_training_dataset(spec, args.out)
    _emit({"total": manifest.total, "counts": manifest.counts, "files": manifest.files})
    return 0


def cmd_suites(args) -> int:
    files = evalsuite.build_suites(args.seed, args.out)
    _emit({"files": files})
    return 0


def cmd_rollout(args) -> int:
    suite = evalsuite.load_suite(args.suite)
    template = rollout.PromptTemplate(
        strategy=args.strategy, mode=args.mode, stage=args.stage
    )
    cfg = rollout.ClientConfig(
        endpoint=args.endpoint,
        model=args.model,
        max_parallel=args.jobs,
        n_samples=args.n,
    )
    client = rollout.ChatClient(cfg)
    try:
        records = rollout.run_rollouts(suite, template, client, args.budget, args.out)
    finally:
        client.close()
    _emit({"puzzles": len(records), "out": str(args.out)})
    return 0


def cmd_train_toy(args) -> int:
    inst = parse_instance(Path(args.puzzle).read_text(encoding="utf-8").strip())
    candidates = [
        line for line in Path(args.candidates).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    trace = rl.train_toy(
        inst, candidates, steps=args.steps, n_rollouts=args.n, lr=args.lr, seed=args.seed
    )
    csv_text = rl.trace_to_csv(trace)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    sys.stderr.write(f"final expected_reward={trace[-1].expected_reward:.4f}\n")
    return 0


def _load_transcripts(path: str) -> dict[str, str]:
    """JSONL of {'puzzle_id': ..., 'transcript': ...} or rollout records."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "transcript" in obj:
                out[obj["puzzle_id"]] = obj["transcript"]
            elif "transcripts" in obj and obj["transcripts"]:
                out[obj["puzzle_id"]] = obj["transcripts"][0]["text"]
    return out


def cmd_eval(args) -> int:
    suite = evalsuite.load_suite(args.suite)
    transcripts = _load_transcripts(args.transcripts)
    report = evalsuite.score_suite(suite, transcripts, args.metric, args.budget)
    if args.format == "markdown":
        sys.stdout.write(report.to_markdown())
    else:
        sys.stdout.write(report.to_csv())
    return 0


def cmd_sweep(args) -> int:
    suite = evalsuite.load_suite(args.suite)
    budgets = [int(b) for b in args.budgets.split(",")]

    def sampler(s, budget):
        path = Path(args.transcripts_dir) / f"transcripts_{budget}.jsonl"
        return _load_transcripts(str(path))

    results = evalsuite.budget_sweep(suite, budgets, sampler, args.metric)
    for budget, report in results:
        sys.stdout.write(report.to_csv())
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="puzzlegym", description="Puzzle environments, rewards, and RL toolkit."
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    def add(name: str, func, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        subparsers[name] = p
        return p

    p = add("gen", cmd_gen, help="generate one puzzle instance")
    p.add_argument("--kind", choices=sorted(GEN_KINDS), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-count", type=int, default=1, help="solution count (alphametic/24-game)")
    p.add_argument("--n-persons", type=int, default=2, help="persons (knk)")
    p.add_argument("--clue-min", type=int, default=None)
    p.add_argument("--clue-max", type=int, default=None)

    p = add("solve", cmd_solve, help="run the enumeration oracle on a payload")
    p.add_argument("--kind", choices=sorted(GEN_KINDS), required=True)
    p.add_argument("--payload", required=True, help="payload JSON")

    p = add("verify", cmd_verify, help="check a candidate against a payload")
    p.add_argument("--kind", choices=sorted(GEN_KINDS), required=True)
    p.add_argument("--payload", required=True)
    p.add_argument("--candidate", required=True)

    p = add("grade", cmd_grade, help="reward a transcript file")
    p.add_argument("--puzzle", required=True, help="file with one serialized instance")
    p.add_argument("--transcript", required=True, help="transcript text file")
    p.add_argument("--mode", choices=["thinking", "non_thinking"], default="thinking")

    p = add("dataset", cmd_dataset, help="build the training dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sudoku6-stage1", type=int, default=None)
    p.add_argument("--sudoku6-stage2", type=int, default=None)
    p.add_argument("--alphametic-stage1", type=int, default=None)
    p.add_argument("--alphametic-stage2", type=int, default=None)

    p = add("suites", cmd_suites, help="build the evaluation suites")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = add("rollout", cmd_rollout, help="sample and grade rollouts from an endpoint")
    p.add_argument("--suite", required=True)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--model", default="default")
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=evalsuite.FALLBACK_BUDGET)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--strategy", choices=["CoT", "ToT"], default="ToT")
    p.add_argument("--mode", choices=["thinking", "non_thinking"], default="thinking")
    p.add_argument("--stage", type=int, choices=[1, 2], default=2)

    p = add("train-toy", cmd_train_toy, help="desk-scale policy-gradient training")
    p.add_argument("--puzzle", required=True)
    p.add_argument("--candidates", required=True, help="file, one candidate answer per line")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="trace CSV path (default stdout)")

    p = add("eval", cmd_eval, help="score stored transcripts against a suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--transcripts", required=True)
    p.add_argument("--metric", choices=["strict", "recall"], default="strict")
    p.add_argument("--budget", type=int, default=evalsuite.FALLBACK_BUDGET)
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")

    p = add("sweep", cmd_sweep, help="budget sweep over stored transcripts")
    p.add_argument("--suite", required=True)
    p.add_argument("--budgets", required=True, help="comma-separated token budgets")
    p.add_argument("--transcripts-dir", required=True)
    p.add_argument("--metric", choices=["strict", "recall"], default="strict")

    return parser, subparsers


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser, subparsers = build_parser()

    # Config file is applied as subcommand defaults; explicit flags win.
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            cfg = json.loads(Path(argv[idx + 1]).read_text(encoding="utf-8"))
        except (IndexError, OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"bad --config: {exc}\n")
            return 2
        command = next((a for a in argv if a in subparsers), None)
        if command is None:
            sys.stderr.write("--config requires a subcommand\n")
            return 2
        sp = subparsers[command]
        valid = {a.dest for a in sp._actions}
        unknown = set(cfg) - valid
        if unknown:
            sys.stderr.write(f"unknown config keys: {sorted(unknown)}\n")
            return 2
        sp.set_defaults(**cfg)
        for action in sp._actions:
            if action.dest in cfg:
                action.required = False

    args = parser.parse_args(argv)
    effective = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    sys.stderr.write(f"config: {json.dumps(effective, default=str, sort_keys=True)}\n")
    try:
        return args.func(args)
    except PuzzleError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
