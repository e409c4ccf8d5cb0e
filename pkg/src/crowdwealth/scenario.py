"""Drive a reward regime over a horizon and record what happened.

run_scenario is the one entry point the CLI uses: it builds the crowd from a
ScenarioConfig, steps the configured regime n_steps times with a seeded
generator, and returns a WealthSeries holding per-step aggregates plus
thinned full wealth snapshots.

A magnitude guard watches |dO| and max A_i; the first step that exceeds
1e12 (or produces a non-finite value) ends the run with status "unbounded"
instead of raising, so callers can report it as an exit code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import InvalidInputError
from .model import MAGNITUDE_LIMIT, CrowdState, response_scale, sign0, system_response
from .rewards import (
    RewardRegime,
    step_additive_random,
    step_feedback_binary,
    step_feedback_continuous,
    step_multiplicative_random,
)


@dataclass
class WealthSeries:
    """Per-step aggregates and thinned snapshots from one scenario run.

    The aggregate arrays share an index: row k describes time t[k], with
    t[0] = 0 describing the initial crowd. `snapshots` holds (t, wealth
    vector) pairs at the configured thinning plus the final step. The series
    gini and share columns are descriptive (computed with the raw rank
    formula even when a regime drives wealth negative); the strict
    validating Gini lives in the analysis module.
    """

    t: np.ndarray
    dO: np.ndarray
    D: np.ndarray
    trend_sign: np.ndarray
    gini: np.ndarray
    top1_share: np.ndarray
    top10_share: np.ndarray
    snapshots: List[Tuple[int, np.ndarray]]
    status: str
    final_state: CrowdState
    metadata: dict = field(default_factory=dict)

    @property
    def n_recorded(self) -> int:
        return int(self.t.shape[0])


def _series_stats(wealth: np.ndarray) -> Tuple[float, float, float]:
    """(gini, top1_share, top10_share) of a wealth vector, defensively.

    Returns zeros when the total is not positive (an all-zero crowd is
    perfectly equal; a negative total has no meaningful shares).
    """
    n = wealth.shape[0]
    total = float(wealth.sum())
    if total <= 0.0 or not math.isfinite(total):
        return 0.0, 0.0, 0.0
    sw = np.sort(wealth)
    if sw[0] == sw[-1]:
        g = 0.0
    else:
        coeffs = 2.0 * np.arange(1, n + 1, dtype=float) - n - 1.0
        g = float(coeffs @ sw) / (n * total)
    k1 = max(1, math.ceil(n / 100))
    k10 = max(1, math.ceil(n / 10))
    top1 = float(sw[n - k1 :].sum()) / total
    top10 = float(sw[n - k10 :].sum()) / total
    return g, top1, top10


def _blown_up(dO: float, wealth: np.ndarray) -> bool:
    if not math.isfinite(dO) or abs(dO) > MAGNITUDE_LIMIT:
        return True
    if not np.all(np.isfinite(wealth)):
        return True
    return bool(np.max(np.abs(wealth)) > MAGNITUDE_LIMIT)


def run_scenario(config) -> WealthSeries:
    """Run one seeded scenario to completion (or to the magnitude guard).

    `config` is a ScenarioConfig (see the config module); only its resolved
    attributes are used, so any object with the same fields works.
    """
    state = config.build_state()
    regime: RewardRegime = config.regime
    n_steps = config.n_steps
    if not config.force.covers(n_steps):
        raise InvalidInputError("external force series is shorter than the horizon")
    rng = np.random.default_rng(config.seed)

    ts = [0]
    dOs = [state.last_dO]
    Ds = [system_response(state)]
    trends = [sign0(Ds[0], response_scale(state))]
    stats = [_series_stats(state.wealth)]
    snapshots: List[Tuple[int, np.ndarray]] = [(0, state.wealth.copy())]
    status = "completed"

    for t in range(1, n_steps + 1):
        d_pre = system_response(state)
        if regime.kind == "feedback-binary":
            outcome = step_feedback_binary(state, regime, config.force.value_at(t - 1), rng)
        elif regime.kind == "feedback-continuous":
            outcome = step_feedback_continuous(state, regime, config.force.value_at(t - 1), rng)
        elif regime.kind == "additive-random":
            outcome = step_additive_random(state, regime, rng)
        else:
            outcome = step_multiplicative_random(state, regime, rng)
        if _blown_up(outcome.dO, state.wealth):
            status = "unbounded"
            break
        ts.append(t)
        dOs.append(outcome.dO)
        Ds.append(d_pre)
        trends.append(outcome.trend_sign)
        stats.append(_series_stats(state.wealth))
        is_last = t == n_steps
        if t % config.snapshot_every == 0 or is_last:
            snapshots.append((t, state.wealth.copy()))

    stat_arr = np.array(stats, dtype=float)
    return WealthSeries(
        t=np.array(ts, dtype=int),
        dO=np.array(dOs, dtype=float),
        D=np.array(Ds, dtype=float),
        trend_sign=np.array(trends, dtype=int),
        gini=stat_arr[:, 0],
        top1_share=stat_arr[:, 1],
        top10_share=stat_arr[:, 2],
        snapshots=snapshots,
        status=status,
        final_state=state,
        metadata={
            "regime": regime.kind,
            "trend_mode": regime.trend_mode,
            "floor": regime.floor,
            "normalize_each_step": regime.normalize_each_step,
            "shock_scale": regime.shock_scale,
            "seed": config.seed,
            "dt": 1,
            "continuous_reward_extension": regime.kind == "feedback-continuous",
        },
    )
