"""Hierarchical rule-based reward.

A transcript is graded in two strictly ordered phases: format validity
(K=4 structural checks) and, only if all checks pass, exact solution-set
accuracy. The scalar reward is F*A*(r_success - r_penalty) + r_penalty,
so with the defaults (+1/-1) it is +1 iff both indicators hold and -1
otherwise. Format failure means accuracy is never consulted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

from . import alphametic, crossword, game24, knk, sudoku
from .core import PuzzleError, PuzzleInstance, SolutionSet, TaskKind

N_CHECKS = 4

STOP_SENTENCE = (
    "Considering the limited time by the user, I have to give the solution "
    "based on the thinking directly now."
)

# Strips optional labels like "Solution 1:" or "3." from answer lines.
_LABEL_RE = re.compile(r"^\s*(?:solution|answer|line)?\s*\d*\s*[:.)-]\s*", re.IGNORECASE)


@dataclass(frozen=True)
class TagConfig:
    think_open: str = "<think>"
    think_close: str = "</think>"
    answer_open: str = "<answer>"
    answer_close: str = "</answer>"

    def __post_init__(self):
        markers = (self.think_open, self.think_close, self.answer_open, self.answer_close)
        if len(set(markers)) != 4 or any(not m for m in markers):
            raise ValueError("tag markers must be four distinct nonempty strings")


DEFAULT_TAGS = TagConfig()


@dataclass(frozen=True)
class RewardParams:
    r_success: float = 1.0
    r_penalty: float = -1.0

    def __post_init__(self):
        if not self.r_success > self.r_penalty:
            raise ValueError("r_success must exceed r_penalty")


DEFAULT_PARAMS = RewardParams()


@dataclass(frozen=True)
class ParsedResponse:
    think_text: str
    answer_text: str
    check_vector: tuple[int, ...]
    mode: str  # "thinking" | "non_thinking"


def _single_block(text: str, opener: str, closer: str) -> tuple[str, int, int] | None:
    """The content of the unique well-ordered block, or None."""
    if text.count(opener) != 1 or text.count(closer) != 1:
        return None
    a = text.index(opener)
    b = text.index(closer)
    if b < a:
        return None
    return text[a + len(opener) : b], a, b + len(closer)


def parse_response(
    text: str, cfg: TagConfig = DEFAULT_TAGS, mode: str = "thinking",
    kind: TaskKind | None = None,
) -> ParsedResponse:
    """Run the K=4 structural checks and split the transcript.

    c1: exactly one well-ordered think block, with nothing but whitespace
        before it; thinking mode requires nonempty content, non_thinking
        mode requires the block be blank.
    c2: exactly one answer block, entirely after the think block.
    c3: the answer text parses under the task's answer schema (requires
        `kind`; skipped as a pass when no kind is given).
    c4: nothing but whitespace after the answer close marker.
    """
    if mode not in ("thinking", "non_thinking"):
        raise ValueError(f"bad mode {mode!r}")
    think_text = ""
    answer_text = ""
    c1 = c2 = c3 = c4 = 0

    think = _single_block(text, cfg.think_open, cfg.think_close)
    if think is not None:
        think_text, t_start, t_end = think
        before_ok = not text[:t_start].strip()
        if mode == "thinking":
            content_ok = bool(think_text.strip())
        else:
            content_ok = not think_text.strip()
        c1 = 1 if (before_ok and content_ok) else 0

        tail = text[t_end:]
        answer = _single_block(tail, cfg.answer_open, cfg.answer_close)
        if answer is not None:
            answer_text, a_start, a_end = answer
            c2 = 1 if not tail[:a_start].strip() else 0
            c4 = 1 if not tail[a_end:].strip() else 0

    if c2 and kind is not None:
        try:
            extract_solutions(answer_text, kind)
            c3 = 1
        except PuzzleError:
            c3 = 0
    elif c2:
        c3 = 1

    return ParsedResponse(
        think_text=think_text,
        answer_text=answer_text,
        check_vector=(c1, c2, c3, c4),
        mode=mode,
    )


def format_validity(r: ParsedResponse) -> int:
    """1 iff every structural check passed."""
    return 1 if sum(r.check_vector) == len(r.check_vector) else 0


def _answer_lines(answer_text: str) -> list[str]:
    lines = []
    for raw in answer_text.splitlines():
        line = _LABEL_RE.sub("", raw).strip()
        if line:
            lines.append(line)
    return lines


def extract_solutions(answer_text: str, kind: TaskKind) -> SolutionSet:
    """Parse an answer block into the extracted canonical solution set.

    Duplicate listed solutions collapse (set semantics). Any unparseable
    line raises, which surfaces upstream as a c3 format failure.
    """
    if kind in (TaskKind.SUDOKU6, TaskKind.SUDOKU9):
        size = 6 if kind == TaskKind.SUDOKU6 else 9
        digits = [ch for ch in answer_text if ch.isdigit()]
        if len(digits) != size * size:
            raise PuzzleError(
                "bad_answer", f"expected {size * size} digits, got {len(digits)}"
            )
        return SolutionSet(["".join(digits)])

    if kind == TaskKind.CROSSWORD5:
        rows = crossword.parse_candidate_grid(answer_text)
        return SolutionSet(["".join(rows)])

    lines = _answer_lines(answer_text)
    if not lines:
        raise PuzzleError("bad_answer", "empty answer block")

    if kind == TaskKind.ALPHAMETIC:
        out = []
        for line in lines:
            pairs = {}
            for part in line.split(","):
                part = part.strip()
                if not part:
                    continue
                k, sep, v = part.partition("=")
                k, v = k.strip().upper(), v.strip()
                if not sep or len(k) != 1 or not k.isalpha() or not v.isdigit():
                    raise PuzzleError("bad_answer", f"expected L=d pair, got {part!r}")
                pairs[k] = int(v)
            if not pairs:
                raise PuzzleError("bad_answer", f"no assignments on line {line!r}")
            out.append(alphametic.canonical_assignment(pairs))
        return SolutionSet(out)

    if kind in (TaskKind.POKER24, TaskKind.MAKE24):
        out = []
        for line in lines:
            expr = game24.parse_expression(line)
            out.append(game24.render(game24.canonicalize(expr)))
        return SolutionSet(out)

    if kind == TaskKind.KNIGHTS_KNAVES:
        out = []
        for line in lines:
            n = sum(1 for part in line.split(",") if part.strip())
            roles = knk.parse_roles(line, n)
            out.append(knk.canonical_roles(roles))
        return SolutionSet(out)

    raise PuzzleError("unknown_kind", f"no answer schema for {kind}")


def accuracy(s: SolutionSet, y: SolutionSet) -> int:
    """1 iff the extracted set equals the ground truth exactly."""
    return 1 if s == y else 0


def partial_credit(s: SolutionSet, y: SolutionSet) -> float:
    """|S intersect Y| / |Y|; only used behind an explicit flag."""
    if len(y) == 0:
        return 0.0
    return len(s.members & y.members) / len(y)


def reward(fmt: int, acc: int, params: RewardParams = DEFAULT_PARAMS) -> float:
    """F*A*(r_success - r_penalty) + r_penalty."""
    return fmt * acc * (params.r_success - params.r_penalty) + params.r_penalty


@dataclass(frozen=True)
class GradeResult:
    puzzle_id: str
    check_vector: tuple[int, ...]
    format_valid: int
    accurate: int
    reward: float

    def to_record(self) -> dict:
        return {
            "puzzle_id": self.puzzle_id,
            "check_vector": list(self.check_vector),
            "F": self.format_valid,
            "A": self.accurate,
            "reward": self.reward,
        }


def grade_transcript(
    text: str,
    instance: PuzzleInstance,
    cfg: TagConfig = DEFAULT_TAGS,
    mode: str = "thinking",
    params: RewardParams = DEFAULT_PARAMS,
) -> GradeResult:
    """Full hierarchical grade of one transcript against one instance."""
    parsed = parse_response(text, cfg, mode, kind=instance.kind)
    fmt = format_validity(parsed)
    acc = 0
    if fmt:
        extracted = extract_solutions(parsed.answer_text, instance.kind)
        acc = accuracy(extracted, instance.solutions)
    return GradeResult(
        puzzle_id=instance.id,
        check_vector=parsed.check_vector,
        format_valid=fmt,
        accurate=acc,
        reward=reward(fmt, acc, params),
    )


def grade_answer(
    answer_text: str,
    instance: PuzzleInstance,
    params: RewardParams = DEFAULT_PARAMS,
) -> float:
    """Reward for a bare answer (no transcript wrapper); parse failure
    counts as a format failure."""
    try:
        extracted = extract_solutions(answer_text, instance.kind)
    except PuzzleError:
        return params.r_penalty
    return reward(1, accuracy(extracted, instance.solutions), params)


def approx_tokens(text: str) -> int:
    """Fallback budget unit when no tokenizer is available: ceil(bytes/4)."""
    return math.ceil(len(text.encode("utf-8")) / 4)


def _cut_bytes(text: str, n_bytes: int) -> str:
    data = text.encode("utf-8")[:n_bytes]
    return data.decode("utf-8", errors="ignore")


def truncate_thinking(
    text: str,
    budget: int,
    cfg: TagConfig = DEFAULT_TAGS,
    counter: Callable[[str], int] = approx_tokens,
) -> str:
    """Enforce the thinking budget on a transcript.

    If the thinking segment is at or over budget, it is cut at the budget
    and the exact stop-instruction sentence is appended; otherwise the
    transcript is returned unchanged. Idempotent: a transcript already
    ending in the stop sentence is never cut again.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if cfg.think_open not in text:
        raise PuzzleError("no_think_segment", "transcript has no thinking segment")
    start = text.index(cfg.think_open) + len(cfg.think_open)
    end = text.find(cfg.think_close, start)
    content = text[start:end] if end != -1 else text[start:]
    suffix = text[end:] if end != -1 else ""

    if content.rstrip().endswith(STOP_SENTENCE):
        return text
    if counter(content) < budget:
        return text
    kept = _cut_bytes(content, budget * 4)
    new_content = kept + ("\n" if kept and not kept.endswith("\n") else "") + STOP_SENTENCE
    return text[:start] + new_content + suffix
