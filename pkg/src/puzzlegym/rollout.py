"""Prompt construction, batched sampling, grading, and group assembly.

Prompts come from versioned template files (templates/*.txt). Sampling
talks to any OpenAI-compatible chat-completion endpoint; the thinking
budget is enforced client-side in two phases (cap the first generation,
truncate with the stop sentence, request the continuation). Rollouts are
persisted incrementally as JSONL and resume by puzzle id.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import httpx

from . import alphametic, game24, knk, sudoku
from .core import PuzzleError, PuzzleInstance, TaskKind
from .reward import (
    DEFAULT_PARAMS,
    DEFAULT_TAGS,
    RewardParams,
    TagConfig,
    approx_tokens,
    grade_transcript,
    truncate_thinking,
)
from .rl import Outcome, RolloutGroup


@dataclass(frozen=True)
class PromptTemplate:
    strategy: str = "ToT"        # "CoT" | "ToT"
    mode: str = "thinking"       # "thinking" | "non_thinking"
    stage: int = 2               # 1 | 2
    tags: TagConfig = DEFAULT_TAGS

    def __post_init__(self):
        if self.strategy not in ("CoT", "ToT"):
            raise ValueError(f"bad strategy {self.strategy!r}")
        if self.mode not in ("thinking", "non_thinking"):
            raise ValueError(f"bad mode {self.mode!r}")
        if self.stage not in (1, 2):
            raise ValueError(f"bad stage {self.stage!r}")


def _load_template(strategy: str) -> str:
    name = "tot.txt" if strategy == "ToT" else "cot.txt"
    text = resources.files("puzzlegym.templates").joinpath(name).read_text("utf-8")
    # Drop the version-comment header lines.
    return "\n".join(l for l in text.splitlines() if not l.startswith("#")).strip() + "\n"


ANSWER_FORMATS = {
    TaskKind.SUDOKU6: "Answer format: 6 lines of 6 digits (the completed grid).",
    TaskKind.SUDOKU9: "Answer format: 9 lines of 9 digits (the completed grid).",
    TaskKind.ALPHAMETIC: (
        "Answer format: one assignment per line as comma-separated LETTER=digit "
        "pairs, one line per distinct solution."
    ),
    TaskKind.POKER24: "Answer format: one arithmetic expression per line, one line per distinct solution.",
    TaskKind.MAKE24: "Answer format: one arithmetic expression per line, one line per distinct solution.",
    TaskKind.KNIGHTS_KNAVES: (
        "Answer format: one line per solution, each listing every person as "
        "comma-separated Pi=knight or Pi=knave entries."
    ),
    TaskKind.CROSSWORD5: "Answer format: 5 lines of 5 letters (the completed grid).",
}


def describe_puzzle(p: PuzzleInstance) -> str:
    """Task-facing rendering of the payload; identical across stages/modes."""
    kind = p.kind
    if kind in (TaskKind.SUDOKU6, TaskKind.SUDOKU9):
        grid = sudoku.grid_from_payload(p.payload)
        rows = "\n".join(
            " ".join(str(v) if v else "." for v in row) for row in grid.rows()
        )
        return (
            f"Complete this {grid.size}x{grid.size} Sudoku (dots are empty cells; "
            f"boxes are {sudoku.BOX_SHAPE[grid.size][0]} rows by "
            f"{sudoku.BOX_SHAPE[grid.size][1]} columns):\n{rows}"
        )
    if kind == TaskKind.ALPHAMETIC:
        puz = alphametic.puzzle_from_payload(p.payload)
        return (
            f"Solve the alphametic equation {puz.equation()}. Each letter stands "
            "for a distinct digit and leading letters are not zero. Find every "
            "assignment that satisfies the equation."
        )
    if kind in (TaskKind.POKER24, TaskKind.MAKE24):
        values = ", ".join(str(v) for v in p.payload["values"])
        return (
            f"Using the numbers {values} exactly once each with + - * / and "
            "parentheses, find every distinct expression that equals 24."
        )
    if kind == TaskKind.KNIGHTS_KNAVES:
        lines = "\n".join(p.payload["rendered"])
        return (
            "On an island, knights always tell the truth and knaves always lie.\n"
            f"{lines}\nDetermine the role of every person."
        )
    if kind == TaskKind.CROSSWORD5:
        across = "\n".join(f"A{i + 1}. {c}" for i, c in enumerate(p.payload["clues_across"]))
        down = "\n".join(f"D{i + 1}. {c}" for i, c in enumerate(p.payload["clues_down"]))
        return f"Solve this 5x5 crossword.\nAcross:\n{across}\nDown:\n{down}"
    raise PuzzleError("unknown_kind", f"cannot render {kind}")


def render_prompt(p: PuzzleInstance, t: PromptTemplate) -> str:
    """Deterministic prompt text for (instance, template)."""
    body = _load_template(t.strategy).format(
        puzzle=describe_puzzle(p),
        answer_format=ANSWER_FORMATS[p.kind],
        think_open=t.tags.think_open,
        think_close=t.tags.think_close,
        answer_open=t.tags.answer_open,
        answer_close=t.tags.answer_close,
    )
    if t.mode == "non_thinking":
        body += (
            f"\nDo not think out loud: leave the reasoning block empty, exactly as "
            f"{t.tags.think_open}\n\n{t.tags.think_close}, and answer directly.\n"
        )
    return body


@dataclass(frozen=True)
class ClientConfig:
    endpoint: str
    model: str = "default"
    credential_env: str = "PUZZLEGYM_API_KEY"
    timeout: float = 120.0
    max_retries: int = 2
    max_parallel: int = 4
    temperature: float = 1.0
    max_tokens: int = 4096
    n_samples: int = 16

    def __post_init__(self):
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


class ChatClient:
    """Minimal OpenAI-compatible chat-completion client."""

    def __init__(self, cfg: ClientConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        headers = {}
        key = os.environ.get(cfg.credential_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"  # never logged
        self._http = httpx.Client(
            timeout=cfg.timeout, headers=headers, transport=transport
        )

    def complete(self, messages: list[dict], max_tokens: int | None = None) -> str:
        payload = {
            "model": self.cfg.model,
            "messages": messages,
            "temperature": self.cfg.temperature,
            "max_tokens": max_tokens or self.cfg.max_tokens,
        }
        last_exc: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            try:
                resp = self._http.post(self.cfg.endpoint, json=payload)
                resp.raise_for_status()
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_exc = exc
                if attempt < self.cfg.max_retries:
                    time.sleep(min(2**attempt * 0.1, 2.0))
        raise PuzzleError("transport_failure", f"request failed: {last_exc}")

    def close(self):
        self._http.close()


@dataclass
class Transcript:
    text: str
    reward: float
    check_vector: list[int]
    format_valid: int
    accurate: int
    budget_used: int
    failed: bool = False


@dataclass
class RolloutRecord:
    puzzle_id: str
    prompt: str
    transcripts: list[Transcript]
    elapsed_s: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "puzzle_id": self.puzzle_id,
                "prompt": self.prompt,
                "transcripts": [vars(t) for t in self.transcripts],
                "elapsed_s": round(self.elapsed_s, 6),
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def _sample_one(
    client: ChatClient,
    prompt: str,
    budget: int,
    instance: PuzzleInstance,
    template: PromptTemplate,
    params: RewardParams,
) -> Transcript:
    """One budget-enforced sample: generate, truncate, continue, grade."""
    tags = template.tags
    try:
        text = client.complete([{"role": "user", "content": prompt}])
    except PuzzleError:
        return Transcript(
            text="",
            reward=params.r_penalty,
            check_vector=[0, 0, 0, 0],
            format_valid=0,
            accurate=0,
            budget_used=0,
            failed=True,
        )
    if tags.think_open in text:
        truncated = truncate_thinking(text, budget, tags)
        if truncated != text:
            # Thinking hit the budget: ask for the post-truncation answer.
            head = truncated
            if tags.think_close in head:
                head = head[: head.index(tags.think_close) + len(tags.think_close)]
            try:
                continuation = client.complete(
                    [
                        {"role": "user", "content": prompt},
                        {"role": "assistant", "content": head},
                    ]
                )
                text = head + continuation
            except PuzzleError:
                text = truncated
    grade = grade_transcript(text, instance, tags, template.mode, params)
    think = ""
    if tags.think_open in text:
        start = text.index(tags.think_open) + len(tags.think_open)
        end = text.find(tags.think_close, start)
        think = text[start:end] if end != -1 else text[start:]
    return Transcript(
        text=text,
        reward=grade.reward,
        check_vector=list(grade.check_vector),
        format_valid=grade.format_valid,
        accurate=grade.accurate,
        budget_used=min(approx_tokens(think), budget),
    )


def run_rollouts(
    suite: list[PuzzleInstance],
    template: PromptTemplate,
    client: ChatClient,
    budget: int,
    out_path: str | Path,
    params: RewardParams = DEFAULT_PARAMS,
) -> list[RolloutRecord]:
    """Sample, grade, and persist n transcripts per puzzle.

    Output is appended one record per line; puzzles already present in
    out_path are skipped, so an interrupted run resumes cleanly.
    """
    out_path = Path(out_path)
    done: set[str] = set()
    records: list[RolloutRecord] = []
    if out_path.exists():
        with open(out_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    done.add(obj["puzzle_id"])
                    records.append(_record_from_obj(obj))
    n = client.cfg.n_samples
    with open(out_path, "a", encoding="utf-8") as fh:
        for inst in suite:
            if inst.id in done:
                continue
            prompt = render_prompt(inst, template)
            start = time.monotonic()
            with ThreadPoolExecutor(max_workers=client.cfg.max_parallel) as pool:
                transcripts = list(
                    pool.map(
                        lambda _: _sample_one(client, prompt, budget, inst, template, params),
                        range(n),
                    )
                )
            rec = RolloutRecord(
                puzzle_id=inst.id,
                prompt=prompt,
                transcripts=transcripts,
                elapsed_s=time.monotonic() - start,
            )
            fh.write(rec.to_json() + "\n")
            fh.flush()
            records.append(rec)
    records.sort(key=lambda r: r.puzzle_id)
    return records


def _record_from_obj(obj: dict) -> RolloutRecord:
    return RolloutRecord(
        puzzle_id=obj["puzzle_id"],
        prompt=obj["prompt"],
        transcripts=[Transcript(**t) for t in obj["transcripts"]],
        elapsed_s=obj["elapsed_s"],
    )


def load_records(path: str | Path) -> list[RolloutRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(_record_from_obj(json.loads(line)))
    return records


def build_groups(records: list[RolloutRecord]) -> list[RolloutGroup]:
    """One reward-only group per prompt (no endpoint log-probabilities)."""
    groups = []
    for rec in records:
        usable = [t for t in rec.transcripts if not t.failed]
        if len(usable) < 2:
            raise PuzzleError(
                "too_few_transcripts",
                f"puzzle {rec.puzzle_id}: {len(usable)} usable transcripts (< 2)",
            )
        groups.append(
            RolloutGroup(
                prompt_id=rec.puzzle_id,
                outcomes=tuple(
                    Outcome(logprob_new=0.0, logprob_old=0.0, reward=t.reward)
                    for t in usable
                ),
            )
        )
    return groups
