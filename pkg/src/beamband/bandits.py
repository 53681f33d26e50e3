"""Stationary stochastic bandit policies.

Arm statistics, the UCB1 and KL-UCB indices, Gaussian/Beta Thompson sampling,
uniform-random selection and regret accounting. Rewards are normalized to
[0, 1] by the caller; passing anything outside that range raises, because it
means a normalization bug upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .backend import core as _core


class PolicyKind(Enum):
    RANDOM = "random"
    UCB1 = "ucb1"
    KLUCB = "klucb"
    TS_GAUSSIAN = "ts"
    TS_BETA = "tsbeta"


@dataclass
class ArmEstimate:
    """Pull count and running mean of the observed normalized rewards.

    ``mean_reward`` is a defined 0.0 sentinel while ``pulls == 0``; selection
    rules never read it in that state (unpulled arms are forced by the +inf
    index sentinel instead).
    """

    pulls: int = 0
    mean_reward: float = 0.0

    def add(self, reward: float) -> None:
        self.pulls += 1
        self.mean_reward += (reward - self.mean_reward) / self.pulls


@dataclass
class PolicyState:
    """A named policy plus the per-arm statistics it reads.

    ``posterior_params`` holds, per arm, ``[posterior_mean, pseudo_count]``
    for Gaussian TS and ``[alpha, beta]`` for Beta TS; it is None for the
    index policies.
    """

    kind: PolicyKind
    arms: list[ArmEstimate]
    total_pulls: int = 0
    posterior_params: list[list[float]] | None = None

    @property
    def num_arms(self) -> int:
        return len(self.arms)


def new_policy(kind: PolicyKind, num_arms: int) -> PolicyState:
    if num_arms < 1:
        raise ValueError("need at least one arm")
    posterior = None
    if kind is PolicyKind.TS_GAUSSIAN:
        posterior = [[0.0, 0.0] for _ in range(num_arms)]
    elif kind is PolicyKind.TS_BETA:
        posterior = [[1.0, 1.0] for _ in range(num_arms)]
    return PolicyState(kind=kind, arms=[ArmEstimate() for _ in range(num_arms)],
                       posterior_params=posterior)


def ucb1_index(arm: ArmEstimate, total_pulls: int) -> float:
    """Empirical mean plus the sqrt(2 ln n / n_i) exploration bonus."""
    if total_pulls < 1:
        raise ValueError("total_pulls must be >= 1")
    if arm.pulls == 0:
        return math.inf
    if arm.pulls > total_pulls:
        raise ValueError("arm pulls exceed total pulls")
    return arm.mean_reward + math.sqrt(2.0 * math.log(total_pulls) / arm.pulls)


def kl_bernoulli(p: float, q: float) -> float:
    """Bernoulli KL divergence with the 0 log 0 = 0 convention."""
    eps = 1e-15
    q = min(max(q, eps), 1.0 - eps)
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def kl_ucb_index(arm: ArmEstimate, total_pulls: int, tolerance: float = 1e-9) -> float:
    """Largest q in [mean, 1] with pulls * kl(mean, q) <= ln(total_pulls).

    Solved by bisection to the given tolerance; returns 1.0 when the
    constraint is slack at the upper endpoint and +inf for an unpulled arm.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    if total_pulls < 1:
        raise ValueError("total_pulls must be >= 1")
    if arm.pulls == 0:
        return math.inf
    mean = arm.mean_reward
    if not 0.0 <= mean <= 1.0:
        raise ValueError(f"mean_reward {mean} outside [0, 1]")
    return _core.kl_ucb_bisect(mean, arm.pulls, math.log(total_pulls), tolerance)


def argmax_with_ties(values, rng: np.random.Generator) -> int:
    """Index of the maximum; exact ties are broken uniformly at random.

    Draws from ``rng`` only when there is an actual tie, so engines that feed
    the same value sequences consume identical randomness.
    """
    best = -math.inf
    ties: list[int] = []
    for i, v in enumerate(values):
        if v > best:
            best = v
            ties = [i]
        elif v == best:
            ties.append(i)
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def ts_sample_and_select(state: PolicyState, rng: np.random.Generator) -> int:
    """One posterior draw per arm; returns the argmax with random tie-breaks."""
    if state.kind is PolicyKind.TS_GAUSSIAN:
        noise = rng.standard_normal(state.num_arms)
        samples = [p[0] + noise[i] * math.sqrt(1.0 / (p[1] + 1.0))
                   for i, p in enumerate(state.posterior_params)]
    elif state.kind is PolicyKind.TS_BETA:
        params = np.asarray(state.posterior_params, dtype=float)
        samples = rng.beta(params[:, 0], params[:, 1])
    else:
        raise ValueError(f"{state.kind} is not a Thompson-sampling policy")
    return argmax_with_ties(samples, rng)


def select_arm(state: PolicyState, rng: np.random.Generator) -> int:
    """Policy dispatch: pick the arm to play this round."""
    kind = state.kind
    if kind is PolicyKind.RANDOM:
        return int(rng.integers(state.num_arms))
    if kind in (PolicyKind.TS_GAUSSIAN, PolicyKind.TS_BETA):
        return ts_sample_and_select(state, rng)
    if kind is PolicyKind.UCB1:
        index = ucb1_index
    elif kind is PolicyKind.KLUCB:
        index = kl_ucb_index
    else:
        raise ValueError(f"unknown policy kind {kind}")
    total = state.total_pulls
    values = [math.inf if a.pulls == 0 else index(a, total) for a in state.arms]
    return argmax_with_ties(values, rng)


def update(state: PolicyState, arm: int, reward: float) -> None:
    """Record one observation: counts, running mean and posterior, in place."""
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward {reward} outside [0, 1]; normalize upstream")
    state.arms[arm].add(reward)
    state.total_pulls += 1
    if state.kind is PolicyKind.TS_GAUSSIAN:
        p = state.posterior_params[arm]
        p[0] = (p[1] * p[0] + reward) / (p[1] + 1.0)
        p[1] += 1.0
    elif state.kind is PolicyKind.TS_BETA:
        p = state.posterior_params[arm]
        p[0] += reward
        p[1] += 1.0 - reward


@dataclass
class RegretLedger:
    """Per-slot gap to the best static arm's mean, clamped at zero.

    Clamping keeps the ledger interpretable when sampling noise makes a
    finite-sample arm estimate overshoot the genius mean.
    """

    best_static_mean: float
    per_slot_regret: list[float] = field(default_factory=list)
    cumulative: float = 0.0


def record_regret(ledger: RegretLedger, chosen_mean: float) -> float:
    gap = max(0.0, ledger.best_static_mean - chosen_mean)
    ledger.per_slot_regret.append(gap)
    ledger.cumulative += gap
    return gap
