"""On-policy RL mathematics at desk scale.

Leave-one-out advantages, the clipped surrogate objective (KL penalty
optional, off by default), and a toy softmax policy over an enumerated
candidate-answer set that makes the math checkable against finite
differences and hand-worked values.

Note on symbols: the importance ratio and the sampled reward are kept
strictly separate here (ratio_i vs reward_i).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import PuzzleInstance
from .reward import RewardParams, DEFAULT_PARAMS, grade_answer
from .rng import child_seed

LOG_RATIO_CLAMP = 30.0


@dataclass(frozen=True)
class Outcome:
    logprob_new: float
    logprob_old: float
    reward: float
    candidate: int | None = None  # toy-policy candidate index, if applicable


@dataclass(frozen=True)
class RolloutGroup:
    prompt_id: str
    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        if len(self.outcomes) < 2:
            raise ValueError("a rollout group needs at least 2 outcomes")
        for o in self.outcomes:
            if not (np.isfinite(o.logprob_new) and np.isfinite(o.logprob_old)):
                raise ValueError("log-probabilities must be finite")

    def rewards(self) -> np.ndarray:
        return np.array([o.reward for o in self.outcomes], dtype=float)


@dataclass(frozen=True)
class SurrogateConfig:
    epsilon: float = 0.2
    beta: float = 0.0  # KL coefficient; excluded by default

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


def rloo_advantages(rewards) -> np.ndarray:
    """A_i = r_i - mean of the other n-1 rewards."""
    r = np.asarray(rewards, dtype=float)
    n = r.size
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 rewards")
    total = r.sum()
    return r - (total - r) / (n - 1)


@dataclass(frozen=True)
class ObjectiveResult:
    per_sample: np.ndarray   # L_i
    objective: float         # mean(L_i) - beta * KL
    ratios: np.ndarray
    advantages: np.ndarray
    clip_fraction: float
    clamped_log_ratios: int  # diagnostic: log-ratios hit the +-30 guard


def clipped_objective(
    g: RolloutGroup,
    cfg: SurrogateConfig = SurrogateConfig(),
    logp_ref: np.ndarray | None = None,
) -> ObjectiveResult:
    """L_i = min(ratio_i * A_i, clip(ratio_i, 1-eps, 1+eps) * A_i).

    Ratios are computed in log-space and exponentiated once; log-ratios
    are clamped to +-30 with a diagnostic count.
    """
    logp_new = np.array([o.logprob_new for o in g.outcomes])
    logp_old = np.array([o.logprob_old for o in g.outcomes])
    log_ratio = logp_new - logp_old
    clamped = int(np.sum(np.abs(log_ratio) > LOG_RATIO_CLAMP))
    ratios = np.exp(np.clip(log_ratio, -LOG_RATIO_CLAMP, LOG_RATIO_CLAMP))
    adv = rloo_advantages(g.rewards())
    clipped = np.clip(ratios, 1 - cfg.epsilon, 1 + cfg.epsilon)
    per_sample = np.minimum(ratios * adv, clipped * adv)
    objective = float(per_sample.mean())
    if cfg.beta > 0:
        if logp_ref is None:
            raise ValueError("beta > 0 requires reference log-probabilities")
        objective -= cfg.beta * kl_estimate(logp_new, np.asarray(logp_ref, dtype=float))
    clip_fraction = float(np.mean(ratios != clipped))
    return ObjectiveResult(
        per_sample=per_sample,
        objective=objective,
        ratios=ratios,
        advantages=adv,
        clip_fraction=clip_fraction,
        clamped_log_ratios=clamped,
    )


def kl_estimate(logp_new, logp_ref) -> float:
    """Sample-mean estimator of log(pi_theta / pi_ref) over the group."""
    a = np.asarray(logp_new, dtype=float)
    b = np.asarray(logp_ref, dtype=float)
    return float(np.mean(a - b))


class ToyPolicy:
    """Softmax distribution over an enumerated candidate-answer set."""

    def __init__(self, n_candidates: int, theta: np.ndarray | None = None):
        if n_candidates < 1:
            raise ValueError("need at least one candidate")
        self.theta = (
            np.zeros(n_candidates) if theta is None else np.asarray(theta, dtype=float).copy()
        )
        if self.theta.shape != (n_candidates,) or not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be a finite vector of length n_candidates")

    def probs(self) -> np.ndarray:
        z = self.theta - self.theta.max()
        e = np.exp(z)
        return e / e.sum()

    def logprob(self, idx: int) -> float:
        z = self.theta - self.theta.max()
        return float(z[idx] - np.log(np.exp(z).sum()))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.theta.size, size=n, p=self.probs())


def toy_gradient(
    policy: ToyPolicy, g: RolloutGroup, cfg: SurrogateConfig = SurrogateConfig()
) -> np.ndarray:
    """Exact gradient of the clipped objective w.r.t. theta.

    Convention at the clip boundary: the clipped branch is active, so a
    sample exactly at 1 +- eps with an advantage of matching sign
    contributes zero gradient through its ratio.
    """
    p = policy.probs()
    grad = np.zeros_like(policy.theta)
    adv = rloo_advantages(g.rewards())
    n = len(g.outcomes)
    for i, o in enumerate(g.outcomes):
        if o.candidate is None:
            raise ValueError("toy gradient needs candidate indices on every outcome")
        a = adv[i]
        if a == 0:
            continue
        log_ratio = np.clip(
            policy.logprob(o.candidate) - o.logprob_old, -LOG_RATIO_CLAMP, LOG_RATIO_CLAMP
        )
        ratio = np.exp(log_ratio)
        if (a > 0 and ratio >= 1 + cfg.epsilon) or (a < 0 and ratio <= 1 - cfg.epsilon):
            continue  # clipped branch active: zero gradient through the ratio
        dlogp = -p.copy()
        dlogp[o.candidate] += 1.0
        grad += a * ratio * dlogp
    return grad / n


@dataclass
class TraceRow:
    step: int
    expected_reward: float
    mean_ratio: float
    clip_fraction: float


def trace_to_csv(rows: list[TraceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["step", "expected_reward", "mean_ratio", "clip_fraction"])
    for r in rows:
        w.writerow([r.step, f"{r.expected_reward:.6f}", f"{r.mean_ratio:.6f}", f"{r.clip_fraction:.6f}"])
    return buf.getvalue()


def train_toy(
    env: PuzzleInstance,
    candidate_space: list[str],
    steps: int = 500,
    n_rollouts: int = 16,
    lr: float = 1.0,
    seed: int = 0,
    cfg: SurrogateConfig = SurrogateConfig(),
    params: RewardParams = DEFAULT_PARAMS,
) -> list[TraceRow]:
    """Plain gradient-ascent loop: sample -> reward -> advantages -> step.

    Candidates are full answer texts graded by the rule-based reward.
    Deterministic under seed; returns the per-step learning trace.
    """
    if not candidate_space:
        raise ValueError("candidate space is empty")
    cand_rewards = np.array(
        [grade_answer(c, env, params) for c in candidate_space], dtype=float
    )
    if not np.any(cand_rewards == params.r_success):
        raise ValueError("candidate space contains no correct answer")
    rng = np.random.default_rng(child_seed(seed, "train_toy", env.id))
    policy = ToyPolicy(len(candidate_space))
    trace: list[TraceRow] = []
    for step in range(steps):
        probs = policy.probs()
        expected = float(probs @ cand_rewards)
        idx = policy.sample(rng, n_rollouts)
        outcomes = tuple(
            Outcome(
                logprob_new=policy.logprob(i),
                logprob_old=policy.logprob(i),  # on-policy: old == new at sampling time
                reward=float(cand_rewards[i]),
                candidate=int(i),
            )
            for i in idx
        )
        group = RolloutGroup(prompt_id=env.id, outcomes=outcomes)
        res = clipped_objective(group, cfg)
        trace.append(
            TraceRow(
                step=step,
                expected_reward=expected,
                mean_ratio=float(res.ratios.mean()),
                clip_fraction=res.clip_fraction,
            )
        )
        grad = toy_gradient(policy, group, cfg)
        policy.theta = policy.theta + lr * grad
    return trace
