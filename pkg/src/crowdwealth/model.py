"""Core state and per-step operations for the feedback-loop crowd model.

A crowd of N agents holds wealth A_i and reacts to two inputs: an external
force dE(t) and the previous aggregate observation dO(t-1). Each step an
agent produces a decision

    dS_i = c_i * dE + b_i * dO(t-1) + eps_i,      eps_i ~ Normal(mu_i, sigma_i)

and the new observation is the wealth-weighted sum of decisions,
dO(t) = sum_i A_i * dS_i. The crowd's instantaneous response factor is
D(t) = sum_i A_i * b_i; with no noise and no force, dO(t) = D(t) * dO(t-1).

In the sign-only ("binary") variant the decision reads the *sign* of the
previous observation instead of its value and is clamped to [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidInputError

# Magnitude guard: beyond this the run is declared unbounded and aborted.
MAGNITUDE_LIMIT = 1e12

# Aggregates within this many ulps of cancellation are treated as exact zero,
# so a perfectly balanced crowd is not steered by rounding noise.
_ZERO_BAND_ULPS = 64.0


def sign0(value: float, scale: float = 0.0) -> int:
    """Sign of `value` with the convention sign0(0) = +1.

    `scale` is the sum of absolute contributions that produced `value`
    (e.g. sum |A_i * b_i| for value = sum A_i * b_i). Anything within the
    floating-point cancellation band of that scale counts as zero. With the
    default scale of 0.0 only an exact zero maps to +1.
    """
    tol = _ZERO_BAND_ULPS * np.finfo(float).eps * scale
    if value > tol:
        return 1
    if value < -tol:
        return -1
    return 1


@dataclass(frozen=True)
class AgentParams:
    """Behavioral parameters of one agent.

    b: feedback coefficient in [-1, 1]. Positive = trend following,
       negative = contrarian, zero = indifferent.
    c: non-negative sensitivity to the external force.
    noise_sigma: standard deviation of the idiosyncratic noise, >= 0.
    drift_mu: mean of the idiosyncratic noise.
    """

    b: float
    c: float = 0.0
    noise_sigma: float = 0.0
    drift_mu: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.b) or not -1.0 <= self.b <= 1.0:
            raise InvalidInputError(f"b must lie in [-1, 1], got {self.b}")
        if not np.isfinite(self.c) or self.c < 0.0:
            raise InvalidInputError(f"c must be >= 0, got {self.c}")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0.0:
            raise InvalidInputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not np.isfinite(self.drift_mu):
            raise InvalidInputError(f"drift_mu must be finite, got {self.drift_mu}")


def _as_array(values, name: str, n: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr.copy()


@dataclass
class CrowdState:
    """Wealth and parameters of the whole crowd at one instant.

    Parameters are stored as parallel arrays (fast at N = 10^5); use
    `from_params` to build from per-agent AgentParams, and `params` to get
    them back. `last_dO` is the raw previous observation; `last_sign` is the
    tracked trend direction used by the binary variant (the raw value can sit
    in the rounding-noise band around zero, the tracked sign cannot).
    """

    wealth: np.ndarray
    b: np.ndarray
    c: np.ndarray
    noise_sigma: np.ndarray
    drift_mu: np.ndarray
    last_dO: float = 1.0
    last_sign: int = field(default=0)  # 0 = derive from last_dO
    t: int = 0

    def __post_init__(self):
        self.wealth = _as_array(self.wealth, "wealth")
        n = self.wealth.shape[0]
        if n < 1:
            raise InvalidInputError("wealth must contain at least one agent")
        if np.any(self.wealth < 0.0):
            raise InvalidInputError("wealth must be non-negative")
        self.b = _as_array(self.b, "b", n)
        if np.any(np.abs(self.b) > 1.0):
            raise InvalidInputError("all b coefficients must lie in [-1, 1]")
        self.c = _as_array(self.c, "c", n)
        if np.any(self.c < 0.0):
            raise InvalidInputError("c coefficients must be >= 0")
        self.noise_sigma = _as_array(self.noise_sigma, "noise_sigma", n)
        if np.any(self.noise_sigma < 0.0):
            raise InvalidInputError("noise_sigma values must be >= 0")
        self.drift_mu = _as_array(self.drift_mu, "drift_mu", n)
        if not np.isfinite(self.last_dO):
            raise InvalidInputError("last_dO must be finite")
        if self.last_sign == 0:
            self.last_sign = sign0(self.last_dO)
        elif self.last_sign not in (-1, 1):
            raise InvalidInputError("last_sign must be -1, +1, or 0 (auto)")

    @classmethod
    def from_params(
        cls,
        wealth: Sequence[float],
        params: Sequence[AgentParams],
        last_dO: float = 1.0,
        t: int = 0,
    ) -> "CrowdState":
        wealth = _as_array(wealth, "wealth")
        if len(params) != wealth.shape[0]:
            raise InvalidInputError("wealth and params must have the same length")
        return cls(
            wealth=wealth,
            b=np.array([p.b for p in params], dtype=float),
            c=np.array([p.c for p in params], dtype=float),
            noise_sigma=np.array([p.noise_sigma for p in params], dtype=float),
            drift_mu=np.array([p.drift_mu for p in params], dtype=float),
            last_dO=last_dO,
            t=t,
        )

    @property
    def n_agents(self) -> int:
        return int(self.wealth.shape[0])

    @property
    def params(self) -> list:
        return [
            AgentParams(b=float(b), c=float(c), noise_sigma=float(s), drift_mu=float(m))
            for b, c, s, m in zip(self.b, self.c, self.noise_sigma, self.drift_mu)
        ]

    def normalized_wealth(self) -> np.ndarray:
        """Wealth as shares of the total. The shares sum to 1 (within 1e-12)."""
        total = float(self.wealth.sum())
        if total <= 0.0:
            raise InvalidInputError("cannot normalize: total wealth is not positive")
        return self.wealth / total

    def copy(self) -> "CrowdState":
        return CrowdState(
            wealth=self.wealth.copy(),
            b=self.b.copy(),
            c=self.c.copy(),
            noise_sigma=self.noise_sigma.copy(),
            drift_mu=self.drift_mu.copy(),
            last_dO=self.last_dO,
            last_sign=self.last_sign,
            t=self.t,
        )


@dataclass(frozen=True)
class ForceSeries:
    """External force dE(t) for t = 0 .. len-1, or a constant for any horizon."""

    values: Optional[np.ndarray] = None
    constant: float = 0.0

    @classmethod
    def zero(cls) -> "ForceSeries":
        return cls()

    @classmethod
    def const(cls, value: float) -> "ForceSeries":
        if not np.isfinite(value):
            raise InvalidInputError("constant force must be finite")
        return cls(constant=float(value))

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "ForceSeries":
        arr = _as_array(values, "force values")
        return cls(values=arr)

    def value_at(self, t: int) -> float:
        if self.values is None:
            return self.constant
        if t < 0 or t >= self.values.shape[0]:
            raise InvalidInputError(
                f"force series has {self.values.shape[0]} entries, no value for t={t}"
            )
        return float(self.values[t])

    def covers(self, horizon: int) -> bool:
        return self.values is None or self.values.shape[0] >= horizon


def decide(
    state: CrowdState,
    dE: float,
    rng: Optional[np.random.Generator] = None,
    binary: bool = False,
) -> np.ndarray:
    """Per-agent decisions for one step.

    Continuous mode: dS_i = c_i * dE + b_i * last_dO + eps_i.
    Binary mode: last_dO is replaced by its tracked sign and the result is
    clamped to [-1, 1].

    `rng` is required only when some agent has noise_sigma > 0; a pure drift
    (mu != 0, sigma == 0) is deterministic and needs no generator.
    """
    if not np.isfinite(dE):
        raise InvalidInputError("dE must be finite")
    signal = float(state.last_sign) if binary else state.last_dO
    ds = state.c * dE + state.b * signal
    if np.any(state.noise_sigma > 0.0):
        if rng is None:
            raise InvalidInputError("rng is required when any noise_sigma > 0")
        ds = ds + state.drift_mu + state.noise_sigma * rng.standard_normal(state.n_agents)
    elif np.any(state.drift_mu != 0.0):
        ds = ds + state.drift_mu
    if binary:
        np.clip(ds, -1.0, 1.0, out=ds)
    return ds


def aggregate_observation(state: CrowdState, decisions: np.ndarray) -> float:
    """Wealth-weighted sum of decisions: dO = sum_i A_i * dS_i.

    Uses the state's current (pre-reward) wealth.
    """
    decisions = np.asarray(decisions, dtype=float)
    if decisions.shape != state.wealth.shape:
        raise InvalidInputError("decisions must match the number of agents")
    if not np.all(np.isfinite(decisions)):
        raise InvalidInputError("decisions contain non-finite values")
    return float(state.wealth @ decisions)


def system_response(state: CrowdState) -> float:
    """Aggregate response factor D = sum_i A_i * b_i at current wealth."""
    return float(state.wealth @ state.b)


def response_scale(state: CrowdState) -> float:
    """Sum of |A_i * b_i|; the cancellation scale that goes with system_response."""
    return float(np.abs(state.wealth) @ np.abs(state.b))
