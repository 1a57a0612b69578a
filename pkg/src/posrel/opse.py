"""Online model selection over score streams via an upper-confidence bandit.

Each arm is a candidate generator; rewards are relation scores in [0, 1].
The arm with the highest optimistic estimate (empirical mean plus an
exploration bonus shrinking with pulls) is sampled next, so sampling
concentrates on the best model after a short exploration phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError

ALPHA_DEFAULT = 2.0


@dataclass
class ArmState:
    pull_count: int = 0
    score_sum: float = 0.0

    @property
    def mean(self) -> float:
        if self.pull_count == 0:
            raise ContractViolationError("arm has no pulls yet")
        return self.score_sum / self.pull_count


@dataclass
class BanditState:
    arms: list[ArmState]
    alpha: float = ALPHA_DEFAULT
    t: int = 0

    def __post_init__(self) -> None:
        if not self.arms:
            raise ContractViolationError("need at least one arm")
        if self.alpha < 0:
            raise ContractViolationError("alpha must be nonnegative")

    @classmethod
    def fresh(cls, n_arms: int, alpha: float = ALPHA_DEFAULT) -> "BanditState":
        if n_arms < 1:
            raise ContractViolationError("need at least one arm")
        return cls([ArmState() for _ in range(n_arms)], alpha)


def ucb_value(arm: ArmState, t: int, alpha: float) -> float:
    """Empirical mean plus the exploration bonus alpha * sqrt(ln(t) / pulls)."""
    if arm.pull_count < 1:
        raise ContractViolationError("ucb_value needs at least one pull; selection handles zero")
    if t < 1:
        raise ContractViolationError("t must be at least 1")
    return arm.mean + alpha * math.sqrt(math.log(t) / arm.pull_count)


def select_arm(state: BanditState) -> int:
    """Next arm to sample: any unpulled arm first, else the highest bound.

    Ties go to the lowest index, so selection is deterministic.
    """
    for i, arm in enumerate(state.arms):
        if arm.pull_count == 0:
            return i
    best_index = 0
    best_value = -math.inf
    for i, arm in enumerate(state.arms):
        value = ucb_value(arm, state.t, state.alpha)
        if value > best_value:
            best_index, best_value = i, value
    return best_index


def update(state: BanditState, arm: int, score: float) -> BanditState:
    """Record one observed score for an arm; mutates and returns the state."""
    if not 0 <= arm < len(state.arms):
        raise ContractViolationError(f"arm index {arm} out of range")
    if not 0.0 <= score <= 1.0:
        raise ContractViolationError(f"score {score} outside [0, 1]")
    state.arms[arm].pull_count += 1
    state.arms[arm].score_sum += score
    state.t += 1
    return state


@dataclass(frozen=True)
class SimulationResult:
    pull_counts: list[int]
    trace: list[int]


def simulate(
    arm_means: list[float],
    rounds: int,
    alpha: float = ALPHA_DEFAULT,
    seed: int = 0,
    reward_model: str = "bernoulli",
) -> SimulationResult:
    """Run the select/update loop against synthetic score streams.

    Scores are Bernoulli draws of each arm's mean by default (matching
    thresholded relation scores); "beta" draws bounded continuous scores
    with the same mean. Bit-reproducible per seed.
    """
    if not arm_means:
        raise ContractViolationError("need at least one arm mean")
    if any(not 0.0 <= m <= 1.0 for m in arm_means):
        raise ContractViolationError("arm means must lie in [0, 1]")
    if rounds < len(arm_means):
        raise ContractViolationError("need at least one round per arm")
    if reward_model not in ("bernoulli", "beta"):
        raise ContractViolationError(f"unknown reward model {reward_model!r}")
    rng = np.random.default_rng(seed)
    state = BanditState.fresh(len(arm_means), alpha)
    trace: list[int] = []
    for _ in range(rounds):
        arm = select_arm(state)
        mean = arm_means[arm]
        if reward_model == "bernoulli":
            score = float(rng.random() < mean)
        else:
            # Concentration 4 keeps the mean while spreading mass over [0, 1].
            score = float(rng.beta(max(mean, 1e-9) * 4.0, max(1.0 - mean, 1e-9) * 4.0))
        update(state, arm, score)
        trace.append(arm)
    return SimulationResult([a.pull_count for a in state.arms], trace)
