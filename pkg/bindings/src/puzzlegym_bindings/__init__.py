"""In-process bindings for the puzzlegym toolkit.

Thin, reentrant wrappers for training loops that want generation,
enumeration, verification, grading, and advantage computation without
subprocess overhead. Data crosses the boundary only as UTF-8 JSON
strings and flat numeric sequences; every operation is byte-/bit-
identical to the corresponding `puzzlegym` CLI output (the parity test
suite is the contract). Errors surface as ValueError with the core
error code embedded in the message.
"""

from __future__ import annotations

import json
import threading

__all__ = [
    "BoundHandle",
    "advantages",
    "enumerate",
    "generate",
    "grade",
    "open_bank",
    "verify",
]
__version__ = "0.1.0"

_enumerate_builtin = enumerate  # shadowed below by the exported operation


def _core():
    # Imported lazily so `import puzzlegym_bindings` fails with a clear
    # message when the core distribution is absent.
    try:
        import puzzlegym.cli
        import puzzlegym.core
        import puzzlegym.reward
        import puzzlegym.rl
    except ImportError as exc:
        raise ValueError(f"core_missing: puzzlegym is not installed ({exc})") from exc
    import puzzlegym

    return puzzlegym


def _wrap_errors(fn):
    def inner(*args, **kwargs):
        core = _core().core
        try:
            return fn(*args, **kwargs)
        except core.PuzzleError as exc:
            raise ValueError(f"{exc.code}: {exc.message}") from exc

    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


def _kind_for(kind: str):
    pg = _core()
    try:
        return pg.cli.GEN_KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown_kind: {kind!r} (expected one of {sorted(pg.cli.GEN_KINDS)})"
        ) from None


@_wrap_errors
def generate(kind: str, params: dict | None = None, seed: int = 0) -> str:
    """One serialized puzzle record; identical bytes to CLI `gen`.

    `params` carries the kind-specific knobs under their CLI names:
    target_count (alphametic / 24-game), n_persons (knk), clue_min /
    clue_max (sudoku).
    """
    pg = _core()
    params = dict(params or {})
    task = _kind_for(kind)
    TK = pg.core.TaskKind
    if task in (TK.SUDOKU6, TK.SUDOKU9):
        size = 6 if task == TK.SUDOKU6 else 9
        clue_range = None
        if "clue_min" in params or "clue_max" in params:
            defaults = pg.sudoku.DEFAULT_CLUE_RANGE[size]
            clue_range = (
                int(params.get("clue_min", defaults[0])),
                int(params.get("clue_max", defaults[1])),
            )
        inst = pg.sudoku.generate(size, seed, clue_range)
    elif task == TK.ALPHAMETIC:
        inst = pg.alphametic.generate(int(params.get("target_count", 1)), seed)
    elif task in (TK.POKER24, TK.MAKE24):
        inst = pg.game24.generate(task, int(params.get("target_count", 1)), seed)
    else:
        inst = pg.knk.generate(int(params.get("n_persons", 2)), seed)
    return pg.core.serialize_instance(inst)


@_wrap_errors
def enumerate(kind: str, payload: str) -> dict:  # noqa: A001 - part of the public API
    """Full solution enumeration of a payload JSON string; same fields as
    CLI `solve`: {kind, solutions, count}."""
    pg = _core()
    task = _kind_for(kind)
    sols = pg.cli._solve_payload(task, json.loads(payload))
    return {"kind": task.value, "solutions": sols, "count": len(sols)}


@_wrap_errors
def verify(kind: str, payload: str, candidate: str) -> dict:
    """Check one candidate against a payload JSON string; same fields as
    CLI `verify` ({valid} or, for the 24-game, {valid, reason})."""
    pg = _core()
    task = _kind_for(kind)
    TK = pg.core.TaskKind
    payload_obj = json.loads(payload)
    if task in (TK.SUDOKU6, TK.SUDOKU9):
        grid = pg.sudoku.grid_from_payload(payload_obj)
        cand = pg.sudoku.parse_answer_grid(candidate, grid.size)
        return {"valid": bool(pg.sudoku.verify(grid, cand))}
    if task == TK.ALPHAMETIC:
        p = pg.alphametic.puzzle_from_payload(payload_obj)
        assignment = pg.alphametic.parse_assignment(candidate, p.letters())
        return {"valid": bool(pg.alphametic.verify(p, assignment))}
    if task in (TK.POKER24, TK.MAKE24):
        return pg.game24.verify_expression(
            pg.game24.hand_from_payload(payload_obj), candidate
        )
    p = pg.knk.puzzle_from_payload(payload_obj)
    return {"valid": bool(pg.knk.verify(p, pg.knk.parse_roles(candidate, p.n_persons)))}


@_wrap_errors
def grade(transcript: str, puzzle_record: str, mode: str = "thinking") -> dict:
    """Hierarchical grade of a transcript against a serialized puzzle
    record; numerically identical to CLI `grade`:
    {puzzle_id, check_vector, F, A, reward}."""
    pg = _core()
    inst = pg.core.parse_instance(puzzle_record)
    return pg.reward.grade_transcript(transcript, inst, mode=mode).to_record()


def advantages(rewards) -> list[float]:
    """Leave-one-out advantages; elementwise equal to the core kernel."""
    pg = _core()
    seq = [float(r) for r in rewards]
    if len(seq) < 2:
        raise ValueError("length_error: need at least 2 rewards")
    return [float(a) for a in pg.rl.rloo_advantages(seq)]


class BoundHandle:
    """Opaque handle over a loaded puzzle bank (JSONL of records).

    Valid until closed; double-close is a no-op. Safe to share across
    threads: the record list is immutable after load.
    """

    def __init__(self, records: tuple[str, ...]):
        self._records = records
        self._open = True
        self._lock = threading.Lock()

    def __len__(self) -> int:
        self._check()
        return len(self._records)

    def record(self, index: int) -> str:
        """The raw serialized record at `index`."""
        self._check()
        return self._records[index]

    def grade(self, index: int, transcript: str, mode: str = "thinking") -> dict:
        self._check()
        return grade(transcript, self._records[index], mode)

    def close(self) -> None:
        with self._lock:
            self._open = False

    def _check(self) -> None:
        if not self._open:
            raise ValueError("closed_handle: handle was closed")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def open_bank(path: str) -> BoundHandle:
    """Load a JSONL puzzle bank; every record is validated on load."""
    pg = _core()
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in _enumerate_builtin(fh):
            if not line.strip():
                continue
            try:
                pg.core.parse_instance(line)
            except pg.core.PuzzleError as exc:
                raise ValueError(f"{exc.code}: line {i + 1}: {exc.message}") from exc
            records.append(line.strip())
    return BoundHandle(tuple(records))
