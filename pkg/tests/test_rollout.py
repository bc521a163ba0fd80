import json
import threading

import httpx
import pytest

from puzzlegym import alphametic, game24
from puzzlegym.core import PuzzleError, TaskKind
from puzzlegym.reward import STOP_SENTENCE
from puzzlegym.rollout import (
    ANSWER_FORMATS,
    ChatClient,
    ClientConfig,
    PromptTemplate,
    build_groups,
    describe_puzzle,
    load_records,
    render_prompt,
    run_rollouts,
)

ENDPOINT = "http://testserver/v1/chat/completions"


def chat_response(content, status=200):
    if status != 200:
        return httpx.Response(status, json={"error": "boom"})
    return httpx.Response(
        200, json={"choices": [{"message": {"content": content}}]}
    )


def make_client(handler, **cfg_kwargs):
    cfg = ClientConfig(endpoint=ENDPOINT, **cfg_kwargs)
    return ChatClient(cfg, transport=httpx.MockTransport(handler))


def good_transcript(inst):
    answer = "\n".join(sorted(inst.solutions))
    return f"<think>worked it out</think><answer>{answer}</answer>"


@pytest.fixture
def instance():
    return alphametic.generate(target_count=1, seed=21)


class TestPromptTemplate:
    def test_validation(self):
        with pytest.raises(ValueError):
            PromptTemplate(strategy="DFS")
        with pytest.raises(ValueError):
            PromptTemplate(mode="loud")
        with pytest.raises(ValueError):
            PromptTemplate(stage=3)

    def test_render_contains_puzzle_and_format(self, instance):
        t = PromptTemplate(strategy="ToT")
        prompt = render_prompt(instance, t)
        assert describe_puzzle(instance) in prompt
        assert ANSWER_FORMATS[TaskKind.ALPHAMETIC] in prompt
        assert "<think>" in prompt and "<answer>" in prompt
        assert "#" not in prompt.split("\n")[0]  # version header stripped

    def test_tot_and_cot_differ(self, instance):
        tot = render_prompt(instance, PromptTemplate(strategy="ToT"))
        cot = render_prompt(instance, PromptTemplate(strategy="CoT"))
        assert tot != cot

    def test_puzzle_body_stable_across_stage_and_mode(self, instance):
        base = describe_puzzle(instance)
        for stage in (1, 2):
            for mode in ("thinking", "non_thinking"):
                t = PromptTemplate(stage=stage, mode=mode)
                assert base in render_prompt(instance, t)

    def test_non_thinking_adds_instruction(self, instance):
        t = PromptTemplate(mode="non_thinking")
        assert "leave the reasoning block empty" in render_prompt(instance, t)

    def test_deterministic(self, instance):
        t = PromptTemplate()
        assert render_prompt(instance, t) == render_prompt(instance, t)


class TestDescribePuzzle:
    def test_all_generated_kinds(self):
        from puzzlegym import knk, sudoku

        insts = [
            sudoku.generate(6, seed=1),
            alphametic.generate(1, seed=1),
            game24.generate(TaskKind.MAKE24, target_count=1, seed=1),
            knk.generate(3, seed=1),
        ]
        for inst in insts:
            text = describe_puzzle(inst)
            assert text and isinstance(text, str)


class TestChatClient:
    def test_happy_path(self):
        client = make_client(lambda req: chat_response("hello"))
        assert client.complete([{"role": "user", "content": "x"}]) == "hello"

    def test_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(req):
            calls["n"] += 1
            return chat_response("ok") if calls["n"] >= 3 else chat_response("", status=500)

        client = make_client(handler, max_retries=2)
        assert client.complete([{"role": "user", "content": "x"}]) == "ok"
        assert calls["n"] == 3

    def test_exhausted_retries_raise(self):
        client = make_client(lambda req: chat_response("", status=500), max_retries=1)
        with pytest.raises(PuzzleError) as e:
            client.complete([{"role": "user", "content": "x"}])
        assert e.value.code == "transport_failure"

    def test_auth_header_from_env_not_in_payload(self, monkeypatch):
        seen = {}

        def handler(req):
            seen["auth"] = req.headers.get("authorization")
            seen["body"] = req.read().decode()
            return chat_response("ok")

        monkeypatch.setenv("PUZZLEGYM_API_KEY", "sk-hush")
        client = make_client(handler)
        client.complete([{"role": "user", "content": "x"}])
        assert seen["auth"] == "Bearer sk-hush"
        assert "sk-hush" not in seen["body"]

    def test_no_header_without_key(self, monkeypatch):
        monkeypatch.delenv("PUZZLEGYM_API_KEY", raising=False)
        seen = {}

        def handler(req):
            seen["auth"] = req.headers.get("authorization")
            return chat_response("ok")

        make_client(handler).complete([{"role": "user", "content": "x"}])
        assert seen["auth"] is None


class TestRunRollouts:
    def test_samples_and_persists(self, instance, tmp_path):
        text = good_transcript(instance)
        client = make_client(lambda req: chat_response(text), n_samples=4, max_parallel=2)
        out = tmp_path / "rollouts.jsonl"
        records = run_rollouts([instance], PromptTemplate(), client, budget=1000, out_path=out)
        assert len(records) == 1
        assert len(records[0].transcripts) == 4
        assert all(t.reward == 1.0 for t in records[0].transcripts)
        # file round-trips
        loaded = load_records(out)
        assert loaded[0].puzzle_id == instance.id
        assert [t.reward for t in loaded[0].transcripts] == [1.0] * 4

    def test_default_n_samples_is_16(self, instance, tmp_path):
        client = make_client(lambda req: chat_response(good_transcript(instance)))
        records = run_rollouts(
            [instance], PromptTemplate(), client, budget=1000, out_path=tmp_path / "r.jsonl"
        )
        assert len(records[0].transcripts) == 16

    def test_resume_skips_done_puzzles(self, instance, tmp_path):
        other = alphametic.generate(target_count=2, seed=33)
        out = tmp_path / "r.jsonl"
        client = make_client(lambda req: chat_response(good_transcript(instance)), n_samples=2)
        run_rollouts([instance], PromptTemplate(), client, budget=1000, out_path=out)
        first = out.read_text()

        counting = {"n": 0}

        def count_handler(req):
            counting["n"] += 1
            return chat_response(good_transcript(other))

        client2 = make_client(count_handler, n_samples=2)
        records = run_rollouts(
            [instance, other], PromptTemplate(), client2, budget=1000, out_path=out
        )
        # only the new puzzle hit the endpoint
        assert counting["n"] == 2
        assert {r.puzzle_id for r in records} == {instance.id, other.id}
        assert out.read_text().startswith(first)

    def test_transport_failure_marks_penalty(self, instance, tmp_path):
        client = make_client(
            lambda req: chat_response("", status=500), n_samples=2, max_retries=0
        )
        records = run_rollouts(
            [instance], PromptTemplate(), client, budget=1000, out_path=tmp_path / "r.jsonl"
        )
        for t in records[0].transcripts:
            assert t.failed
            assert t.reward == -1.0
            assert t.check_vector == [0, 0, 0, 0]

    def test_budget_triggers_continuation(self, instance, tmp_path):
        long_think = "<think>" + "reasoning " * 2000 + "</think><answer>A=1</answer>"
        answer = "\n".join(sorted(instance.solutions))
        calls = []
        lock = threading.Lock()

        def handler(req):
            body = json.loads(req.read())
            with lock:
                calls.append(len(body["messages"]))
            if len(body["messages"]) == 1:
                return chat_response(long_think)
            # continuation request carries the truncated head as assistant turn
            assert STOP_SENTENCE in body["messages"][1]["content"]
            return chat_response(f"<answer>{answer}</answer>")

        client = make_client(handler, n_samples=1, max_parallel=1)
        records = run_rollouts(
            [instance], PromptTemplate(), client, budget=50, out_path=tmp_path / "r.jsonl"
        )
        t = records[0].transcripts[0]
        assert calls == [1, 2]
        assert STOP_SENTENCE in t.text
        assert t.reward == 1.0
        assert t.budget_used == 50

    def test_under_budget_single_call(self, instance, tmp_path):
        calls = {"n": 0}

        def handler(req):
            calls["n"] += 1
            return chat_response(good_transcript(instance))

        client = make_client(handler, n_samples=1)
        run_rollouts([instance], PromptTemplate(), client, budget=10_000, out_path=tmp_path / "r.jsonl")
        assert calls["n"] == 1


class TestBuildGroups:
    def test_groups_from_records(self, instance, tmp_path):
        client = make_client(lambda req: chat_response(good_transcript(instance)), n_samples=3)
        records = run_rollouts(
            [instance], PromptTemplate(), client, budget=1000, out_path=tmp_path / "r.jsonl"
        )
        groups = build_groups(records)
        assert len(groups) == 1
        assert groups[0].prompt_id == instance.id
        assert [o.reward for o in groups[0].outcomes] == [1.0, 1.0, 1.0]

    def test_failed_transcripts_excluded_and_minimum_enforced(self, instance, tmp_path):
        client = make_client(
            lambda req: chat_response("", status=500), n_samples=2, max_retries=0
        )
        records = run_rollouts(
            [instance], PromptTemplate(), client, budget=1000, out_path=tmp_path / "r.jsonl"
        )
        with pytest.raises(PuzzleError) as e:
            build_groups(records)
        assert e.value.code == "too_few_transcripts"
