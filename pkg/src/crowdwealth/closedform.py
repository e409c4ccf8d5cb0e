"""Closed-form wealth predictions for the deterministic trendy regime.

When every step rewards agents by A_i <- A_i * (1 + b_i), wealth after n
steps is A_i(0) * (1 + b_i)^n, so the normalized share of agent i is

    share_i = (1 + b_i)^n / sum_j (1 + b_j)^n.

Two named coefficient profiles make that share analytically interesting:

* power_law(c, b): 1 + b_i = c / i**b for ranks i = 1..N, which turns the
  shares into an exact rank power law share_i ~ i**(-b*n).
* linear_declining: b_i falls linearly from +1 (rank 1) to -1 (rank N), which
  gives A_i(n) = A_i(0) * 2**n * ((N - i) / (N - 1))**n; the last agent is
  wiped out exactly and the midpoint agent never changes.

All powers are taken in log space so that n in the hundreds neither
overflows nor loses the small shares to underflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

PROFILE_KINDS = ("power_law", "linear_declining", "explicit")


@dataclass(frozen=True)
class BProfile:
    """A named recipe for per-rank feedback coefficients.

    kind: one of "power_law" (params c > 0, 0 < b, c <= 2 so coefficients
    stay in [-1, 1]), "linear_declining", or "explicit" (values given).
    """

    kind: str
    c: Optional[float] = None
    b: Optional[float] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidInputError(f"unknown profile kind {self.kind!r}")
        if self.kind == "power_law":
            if self.c is None or self.b is None:
                raise InvalidInputError("power_law profile needs c and b")
            if not (np.isfinite(self.c) and self.c > 0.0):
                raise InvalidInputError("power_law c must be > 0")
            if not (np.isfinite(self.b) and self.b > 0.0):
                raise InvalidInputError("power_law b must be > 0")
            if self.c > 2.0:
                # 1 + b_1 = c, so c > 2 would push the top coefficient past 1.
                raise InvalidInputError("power_law c must be <= 2 to keep b in [-1, 1]")
        if self.kind == "explicit" and not self.values:
            raise InvalidInputError("explicit profile needs values")


def generate_profile(profile: BProfile, n_agents: int) -> np.ndarray:
    """Materialize per-rank coefficients b_1..b_N for a profile.

    Ranks are 1-based and coefficients are non-increasing in rank for the
    named profiles. Raises if any coefficient would leave [-1, 1].
    """
    if n_agents < 2:
        raise InvalidInputError("a profile needs at least 2 agents")
    if profile.kind == "power_law":
        i = np.arange(1, n_agents + 1, dtype=float)
        coeffs = profile.c / i**profile.b - 1.0
    elif profile.kind == "linear_declining":
        i = np.arange(1, n_agents + 1, dtype=float)
        coeffs = 1.0 - 2.0 * (i - 1.0) / (n_agents - 1.0)
    else:
        coeffs = np.asarray(profile.values, dtype=float)
        if coeffs.shape[0] != n_agents:
            raise InvalidInputError(
                f"explicit profile has {coeffs.shape[0]} values, expected {n_agents}"
            )
    if not np.all(np.isfinite(coeffs)):
        raise InvalidInputError("profile produced non-finite coefficients")
    if np.any(np.abs(coeffs) > 1.0):
        raise InvalidInputError("profile produced coefficients outside [-1, 1]")
    return coeffs


def trendy_wealth(coeffs: Sequence[float], n_steps: int) -> np.ndarray:
    """Normalized wealth shares after n_steps of the trendy update.

    share_i = (1 + b_i)^n / sum_j (1 + b_j)^n, computed in log space.
    A coefficient of exactly -1 yields a share of exactly 0 for n >= 1.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.shape[0] < 1:
        raise InvalidInputError("coeffs must be a non-empty vector")
    if np.any(coeffs < -1.0) or np.any(coeffs > 1.0) or not np.all(np.isfinite(coeffs)):
        raise InvalidInputError("coefficients must lie in [-1, 1]")
    if n_steps < 0:
        raise InvalidInputError("n_steps must be >= 0")
    n = coeffs.shape[0]
    if n_steps == 0:
        return np.full(n, 1.0 / n)
    with np.errstate(divide="ignore"):
        log_growth = n_steps * np.log1p(coeffs)  # -inf where b == -1
    top = float(np.max(log_growth))
    if top == -np.inf:
        raise InvalidInputError("all coefficients are -1; total wealth is zero")
    shares = np.exp(log_growth - top)
    return shares / shares.sum()


def trendy_wealth_ratio(coeffs: Sequence[float], n_steps: int) -> np.ndarray:
    """Per-rank growth ratio alpha_i^n relative to rank 1.

    alpha_i = (1 + b_i) / (1 + b_1); rank 1 must not have b = -1.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.shape[0] < 1:
        raise InvalidInputError("coeffs must be a non-empty vector")
    if np.any(coeffs < -1.0) or np.any(coeffs > 1.0) or not np.all(np.isfinite(coeffs)):
        raise InvalidInputError("coefficients must lie in [-1, 1]")
    if n_steps < 0:
        raise InvalidInputError("n_steps must be >= 0")
    if coeffs[0] == -1.0:
        raise InvalidInputError("rank-1 coefficient is -1; ratios are undefined")
    if n_steps == 0:
        return np.ones_like(coeffs)
    base = np.log1p(coeffs[0])
    with np.errstate(divide="ignore"):
        log_ratio = n_steps * (np.log1p(coeffs) - base)
    return np.exp(log_ratio)


def linear_declining_wealth(n_agents: int, n_steps: int, initial: float = 1.0) -> np.ndarray:
    """Unnormalized wealth after n_steps under the linear_declining profile.

    A_i(n) = initial * 2^n * ((N - i) / (N - 1))^n for ranks i = 1..N with
    every agent starting at `initial`. Rank N ends at exactly 0 for n >= 1
    and the midpoint rank (odd N) keeps its starting wealth exactly.
    """
    if n_agents < 2:
        raise InvalidInputError("need at least 2 agents")
    if n_steps < 0:
        raise InvalidInputError("n_steps must be >= 0")
    if not (np.isfinite(initial) and initial > 0.0):
        raise InvalidInputError("initial wealth must be positive")
    i = np.arange(1, n_agents + 1, dtype=float)
    frac = (n_agents - i) / (n_agents - 1.0)
    if n_steps == 0:
        return np.full(n_agents, float(initial))
    # fused (2*frac)^n keeps rank N at an exact 0 instead of inf * 0 = nan
    return initial * (2.0 * frac) ** n_steps
