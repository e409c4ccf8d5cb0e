"""Reward regimes: how one step of outcomes changes the wealth vector.

Feedback regimes pay agents whose decisions align with the realized
observation: dA_i = A_i * dS_i * sign(dO(t)). In the sign-only variant with
no noise and no force this collapses to A_i <- A_i * (1 + b_i * trend_sign)
where trend_sign is the sign of the aggregate response sum_i A_i * b_i, so
the crowd amplifies whichever direction it already leans.

Two reference regimes with no feedback at all bracket the behavior:
additive-random (A_i += shock) drifts toward a normal wealth distribution,
multiplicative-random (A_i *= 1 + shock) toward a lognormal one; adding a
wealth floor to either piles mass at the boundary, and the multiplicative
regime with a floor develops a power-law upper tail.

Steppers mutate the passed CrowdState in place (cheap at N = 10^5) and
return a StepOutcome describing what happened.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .model import (
    MAGNITUDE_LIMIT,
    CrowdState,
    ForceSeries,
    aggregate_observation,
    decide,
    response_scale,
    sign0,
    system_response,
)

REGIME_KINDS = (
    "feedback-binary",
    "feedback-continuous",
    "additive-random",
    "multiplicative-random",
)
TREND_MODES = ("endogenous", "persistent")

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RewardRegime:
    """Which update rule runs each step, plus its knobs.

    floor: optional lower bound applied to wealth after each update
      (clamping only; nothing is redistributed).
    normalize_each_step: rescale wealth to sum to 1 after each step
      (applied last, after the floor).
    shock_scale: standard deviation of the random shock; required > 0 for the
      two random regimes, ignored by the feedback regimes.
    trend_mode: "endogenous" lets the observation sign evolve by the model's
      own recursion; "persistent" holds sign(dO(t)) = sign(dO(t-1)), i.e. an
      externally maintained trend, which keeps the closed-form growth
      A_i * (1 + b_i)^n exact for any coefficient profile.
    """

    kind: str
    floor: Optional[float] = None
    normalize_each_step: bool = False
    shock_scale: Optional[float] = None
    trend_mode: str = "endogenous"

    def __post_init__(self):
        if self.kind not in REGIME_KINDS:
            raise InvalidInputError(f"unknown regime kind {self.kind!r}")
        if self.floor is not None and not (np.isfinite(self.floor) and self.floor >= 0.0):
            raise InvalidInputError("floor must be finite and >= 0")
        if self.kind in ("additive-random", "multiplicative-random"):
            if self.shock_scale is None or not (
                np.isfinite(self.shock_scale) and self.shock_scale > 0.0
            ):
                raise InvalidInputError(f"{self.kind} requires shock_scale > 0")
        if self.trend_mode not in TREND_MODES:
            raise InvalidInputError(f"unknown trend_mode {self.trend_mode!r}")


@dataclass
class StepOutcome:
    """What one step produced: the observation, its sign, and the payouts."""

    dO: float
    sign_dO: int
    trend_sign: int
    rewards: np.ndarray


def apply_floor(wealth: np.ndarray, floor: float) -> np.ndarray:
    """Clamp wealth from below: max(A_i, floor). No redistribution."""
    if not (np.isfinite(floor) and floor >= 0.0):
        raise InvalidInputError("floor must be finite and >= 0")
    return np.maximum(wealth, floor)


def _finish_step(state: CrowdState, regime: RewardRegime) -> None:
    if regime.floor is not None:
        np.maximum(state.wealth, regime.floor, out=state.wealth)
    if regime.normalize_each_step:
        total = float(state.wealth.sum())
        # an all-zero crowd stays all-zero; rescaling is a no-op there
        if total > 0.0:
            state.wealth /= total
    state.t += 1


def _realized_sign(dO: float, scale: float, prev_sign: int) -> int:
    """Sign of a realized observation; inside the rounding band the previous
    trend direction continues instead of flipping on noise."""
    tol = 64.0 * _EPS * scale
    if dO > tol:
        return 1
    if dO < -tol:
        return -1
    return prev_sign


def step_feedback_binary(
    state: CrowdState,
    regime: RewardRegime,
    dE: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> StepOutcome:
    """One sign-feedback step: decide from sign(dO(t-1)), observe, reward.

    With no noise and no force the observation sign follows the exact
    recursion sign(dO(t)) = sign(dO(t-1)) * sign(sum_i A_i b_i) and the
    update reduces to A_i * (1 + b_i * trend_sign). With noise or force the
    realized observation's own sign is used. Rewards always satisfy
    dA_i = A_i * dS_i * sign_dO with pre-reward wealth.
    """
    if regime.kind != "feedback-binary":
        raise InvalidInputError("regime kind must be feedback-binary")
    if np.any(np.abs(state.b) > 1.0):
        raise InvalidInputError("feedback-binary requires all |b_i| <= 1")
    prev_sign = state.last_sign
    ds = decide(state, dE, rng, binary=True)
    trend = sign0(system_response(state), response_scale(state))
    dO = aggregate_observation(state, ds)
    pure = (
        not np.any(state.noise_sigma > 0.0)
        and not np.any(state.drift_mu != 0.0)
        and (dE == 0.0 or not np.any(state.c != 0.0))
    )
    if regime.trend_mode == "persistent":
        sign_dO = prev_sign
    elif pure:
        sign_dO = prev_sign * trend
    else:
        sign_dO = _realized_sign(dO, float(np.abs(state.wealth) @ np.abs(ds)), prev_sign)
    rewards = state.wealth * ds * float(sign_dO)
    state.wealth += rewards
    state.last_dO = dO
    state.last_sign = sign_dO
    _finish_step(state, regime)
    return StepOutcome(dO=dO, sign_dO=sign_dO, trend_sign=trend, rewards=rewards)


def step_feedback_continuous(
    state: CrowdState,
    regime: RewardRegime,
    dE: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> StepOutcome:
    """One value-feedback step: decisions read the raw dO(t-1), unclamped.

    The reward rule is the same alignment payout as the binary regime,
    dA_i = A_i * dS_i * sign(dO(t)); runs using it are flagged in scenario
    metadata since decisions here are not confined to [-1, 1].
    """
    if regime.kind != "feedback-continuous":
        raise InvalidInputError("regime kind must be feedback-continuous")
    prev_sign = state.last_sign
    ds = decide(state, dE, rng, binary=False)
    trend = sign0(system_response(state), response_scale(state))
    dO = aggregate_observation(state, ds)
    if regime.trend_mode == "persistent":
        sign_dO = prev_sign
    else:
        sign_dO = _realized_sign(dO, float(np.abs(state.wealth) @ np.abs(ds)), prev_sign)
    rewards = state.wealth * ds * float(sign_dO)
    state.wealth += rewards
    state.last_dO = dO
    state.last_sign = sign_dO
    _finish_step(state, regime)
    return StepOutcome(dO=dO, sign_dO=sign_dO, trend_sign=trend, rewards=rewards)


def step_additive_random(
    state: CrowdState,
    regime: RewardRegime,
    rng: np.random.Generator,
) -> StepOutcome:
    """A_i += phi_i with phi_i ~ Normal(0, shock_scale). No feedback at all.

    This is the unconstrained reference walk: without a floor, wealth may go
    negative (that is what makes its long-run distribution normal). Add a
    floor to impose a boundary.
    """
    if regime.kind != "additive-random":
        raise InvalidInputError("regime kind must be additive-random")
    shocks = regime.shock_scale * rng.standard_normal(state.n_agents)
    state.wealth += shocks
    _finish_step(state, regime)
    return StepOutcome(dO=0.0, sign_dO=state.last_sign, trend_sign=1, rewards=shocks)


def step_multiplicative_random(
    state: CrowdState,
    regime: RewardRegime,
    rng: np.random.Generator,
) -> StepOutcome:
    """A_i *= (1 + phi_i), phi_i ~ Normal(0, shock_scale) truncated to (-1, inf).

    The truncation (by resampling) keeps every wealth strictly positive, so
    requires all A_i > 0 on entry.
    """
    if regime.kind != "multiplicative-random":
        raise InvalidInputError("regime kind must be multiplicative-random")
    if np.any(state.wealth <= 0.0):
        raise InvalidInputError("multiplicative-random requires all wealth > 0")
    shocks = regime.shock_scale * rng.standard_normal(state.n_agents)
    bad = shocks <= -1.0
    while np.any(bad):
        shocks[bad] = regime.shock_scale * rng.standard_normal(int(bad.sum()))
        bad = shocks <= -1.0
    rewards = state.wealth * shocks
    state.wealth += rewards
    _finish_step(state, regime)
    return StepOutcome(dO=0.0, sign_dO=state.last_sign, trend_sign=1, rewards=rewards)
