"""Seeded simulation harness comparing bandit strategies.

Two tools live here: a Bernoulli-environment regret benchmark for the
selection strategies, and a synthetic-corpus experiment contrasting
bandit-driven candidate selection with uniform-random picking. Both
are deterministic given their seeds; the CSV export deliberately
excludes wall-clock time so identical invocations produce identical
bytes (wall time is reported separately).
"""

import random
import time
from dataclasses import dataclass

import numpy as np

from .bandit import (
    BanditState,
    RewardSignal,
    ThompsonState,
    epsilon_greedy_select,
    thompson_select,
    thompson_update,
    ucb1_select,
    update_mean,
)
from .config import STRATEGIES
from .errors import EmptyInput, OutOfRangeArgument, UnknownStrategy
from .pipeline import stable_seed
from .scoring import composite_score

FINAL_WINDOW = 1_000


@dataclass(frozen=True)
class BernoulliEnv:
    """Arms paying 1 with probability means[a], else 0."""

    means: tuple[float, ...]

    def __post_init__(self):
        if not self.means:
            raise EmptyInput("environment needs at least one arm")
        for m in self.means:
            if not 0.0 <= m <= 1.0:
                raise OutOfRangeArgument(f"arm mean {m} outside [0, 1]")

    @property
    def best_arm(self) -> int:
        best = 0
        for a, m in enumerate(self.means):
            if m > self.means[best]:
                best = a
        return best

    @property
    def best_mean(self) -> float:
        return self.means[self.best_arm]


def _parse_means(raw) -> tuple[float, ...]:
    try:
        return tuple(float(m) for m in raw)
    except (TypeError, ValueError) as err:
        raise OutOfRangeArgument(f"arm means must be numbers, got {raw!r}") from err


def load_environment(doc) -> BernoulliEnv:
    """Accepts {"kind": "bernoulli", "means": [...]} or a bare list."""
    if isinstance(doc, list):
        return BernoulliEnv(means=_parse_means(doc))
    if isinstance(doc, dict):
        kind = doc.get("kind", "bernoulli")
        if kind != "bernoulli":
            raise UnknownStrategy(f"unsupported environment kind {kind!r}")
        return BernoulliEnv(means=_parse_means(doc.get("means", [])))
    raise OutOfRangeArgument("environment must be a list of means or an object")


@dataclass(frozen=True)
class StrategyRun:
    strategy: str
    seed: int
    rounds: int
    mean_reward: float
    final_regret: float
    regret_at: dict[int, float]
    best_arm: int
    best_arm_frequency: float
    wall_seconds: float


def _checkpoints(rounds: int) -> list[int]:
    return sorted({max(1, rounds // 10), rounds})


def run_strategy(
    env: BernoulliEnv,
    strategy: str,
    seed: int,
    rounds: int,
    *,
    exploration_weight: float = 0.5,
    epsilon: float = 0.1,
    prior_alpha: float = 0.1,
    prior_beta: float = 1.0,
) -> StrategyRun:
    if strategy not in STRATEGIES:
        raise UnknownStrategy(f"unknown strategy {strategy!r}")
    if rounds < 1:
        raise OutOfRangeArgument("rounds must be >= 1")

    rng_env = random.Random(stable_seed("sim-env", seed))
    rng_policy = random.Random(stable_seed("sim-policy", strategy, seed))
    k = len(env.means)
    best_arm = env.best_arm
    best_mean = env.best_mean
    checkpoints = _checkpoints(rounds)

    if strategy == "thompson":
        tstate = ThompsonState(
            arm_count=k, prior_alpha=prior_alpha, prior_beta=prior_beta
        )
    else:
        state = BanditState(arm_count=k, exploration_weight=exploration_weight)

    total_reward = 0.0
    regret = 0.0
    regret_at: dict[int, float] = {}
    window = max(0, rounds - FINAL_WINDOW)
    best_in_window = 0

    started = time.perf_counter()
    for t in range(1, rounds + 1):
        if strategy == "ucb1":
            arm = ucb1_select(state)
        elif strategy == "epsilon_greedy":
            arm = epsilon_greedy_select(state, epsilon, rng_policy)
        else:
            arm = thompson_select(tstate, rng_policy)
        payout = 1.0 if rng_env.random() < env.means[arm] else 0.0
        signal = RewardSignal(value=payout)
        if strategy == "thompson":
            thompson_update(tstate, arm, signal, rng_policy)
        else:
            update_mean(state, arm, signal)
        total_reward += payout
        regret += best_mean - env.means[arm]
        if arm == best_arm and t > window:
            best_in_window += 1
        if t in checkpoints:
            regret_at[t] = regret
    wall = time.perf_counter() - started

    return StrategyRun(
        strategy=strategy,
        seed=seed,
        rounds=rounds,
        mean_reward=total_reward / rounds,
        final_regret=regret,
        regret_at=regret_at,
        best_arm=best_arm,
        best_arm_frequency=best_in_window / min(FINAL_WINDOW, rounds),
        wall_seconds=wall,
    )


def simulate_strategies(
    env: BernoulliEnv,
    strategies: list[str],
    seeds: list[int],
    rounds: int = 10_000,
    **policy_kwargs,
) -> list[StrategyRun]:
    """Every (strategy, seed) pair, in the given order."""
    for s in strategies:
        if s not in STRATEGIES:
            raise UnknownStrategy(f"unknown strategy {s!r}")
    if not strategies or not seeds:
        raise EmptyInput("need at least one strategy and one seed")
    return [
        run_strategy(env, s, seed, rounds, **policy_kwargs)
        for s in strategies
        for seed in seeds
    ]


def runs_to_csv(runs: list[StrategyRun]) -> str:
    """Deterministic CSV: no wall time, full float precision."""
    if not runs:
        raise EmptyInput("no runs to export")
    checkpoints = sorted(runs[0].regret_at)
    header = [
        "strategy",
        "seed",
        "rounds",
        "mean_reward",
        "final_regret",
        "best_arm",
        "best_arm_frequency",
    ] + [f"regret_at_{c}" for c in checkpoints]
    lines = [",".join(header)]
    for r in runs:
        row = [
            r.strategy,
            str(r.seed),
            str(r.rounds),
            repr(r.mean_reward),
            repr(r.final_regret),
            str(r.best_arm),
            repr(r.best_arm_frequency),
        ] + [repr(r.regret_at.get(c, r.final_regret)) for c in checkpoints]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summarize(runs: list[StrategyRun]) -> dict:
    """Per-strategy aggregates over seeds."""
    out: dict[str, dict] = {}
    for r in runs:
        agg = out.setdefault(
            r.strategy,
            {"seeds": 0, "mean_reward": 0.0, "final_regret": 0.0,
             "best_arm_frequency": 0.0, "wall_seconds": 0.0},
        )
        agg["seeds"] += 1
        agg["mean_reward"] += r.mean_reward
        agg["final_regret"] += r.final_regret
        agg["best_arm_frequency"] += r.best_arm_frequency
        agg["wall_seconds"] += r.wall_seconds
    for agg in out.values():
        n = agg["seeds"]
        for key in ("mean_reward", "final_regret", "best_arm_frequency"):
            agg[key] /= n
    return out


def selection_experiment(
    num_objects: int = 1_000,
    seeds: range | list[int] = range(20),
    *,
    arms: int = 4,
    rounds: int = 50,
    blend_ratio: float = 0.2,
    exploration_weight: float = 0.5,
) -> dict:
    """Bandit-picked vs uniformly-picked candidates on synthetic scores.

    Each synthetic object gets `arms` candidates with drawn confidence
    and relevance; both selectors see identical composite scores. The
    bandit runs the real selection loop with deterministic rewards and
    keeps its most-pulled arm.
    """
    per_seed = []
    for seed in seeds:
        draw = np.random.default_rng(stable_seed("selection-exp", seed))
        uniform_rng = random.Random(stable_seed("selection-uniform", seed))
        bandit_total = 0.0
        uniform_total = 0.0
        for _ in range(num_objects):
            confs = draw.uniform(0.2, 0.95, size=arms)
            raw_rel = draw.uniform(0.0, 1.0, size=arms)
            rel = np.exp(raw_rel) / np.exp(raw_rel).sum()
            scores = [
                composite_score(float(confs[a]), float(rel[a]), blend_ratio)
                for a in range(arms)
            ]
            state = BanditState(arm_count=arms, exploration_weight=exploration_weight)
            for _t in range(rounds):
                arm = ucb1_select(state)
                update_mean(state, arm, RewardSignal(value=scores[arm]))
            chosen = max(range(arms), key=lambda a: (state.pulls[a], -a))
            bandit_total += scores[chosen]
            uniform_total += scores[uniform_rng.randrange(arms)]
        per_seed.append(
            {
                "seed": int(seed),
                "bandit_mean": bandit_total / num_objects,
                "uniform_mean": uniform_total / num_objects,
                "improvement": (bandit_total - uniform_total) / num_objects,
            }
        )
    improvements = [row["improvement"] for row in per_seed]
    return {
        "num_objects": num_objects,
        "seeds": len(per_seed),
        "per_seed": per_seed,
        "mean_improvement": sum(improvements) / len(improvements),
        "min_improvement": min(improvements),
        "all_positive": all(v > 0.0 for v in improvements),
    }
