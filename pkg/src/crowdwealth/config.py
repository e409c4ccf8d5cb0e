"""Scenario configuration: JSON schema, validation, and resolution.

A scenario file is a single JSON object:

    {
      "n_agents": 100,
      "n_steps": 50,
      "seed": 12345,
      "regime": {"kind": "feedback-binary", "floor": null,
                 "normalize_each_step": false, "trend_mode": "endogenous",
                 "shock_scale": null},
      "b_profile": {"kind": "power_law", "c": 1.5, "b": 0.3},
      "c_value": 0.0,
      "noise": {"sigma": 0.0, "mu": 0.0},
      "external_force": {"kind": "none"},
      "dO_initial": 1.0,
      "initial_wealth": {"kind": "equal", "value": 1.0},
      "snapshot_every": 10
    }

c_value, noise.sigma and noise.mu accept either a scalar (applied to every
agent) or a list of n_agents values. b_profile kinds are power_law
(c, b), linear_declining, and explicit (values); the profile is optional
for the two random regimes (coefficients default to zero there).
external_force is {"kind": "none"}, {"kind": "constant", "value": v}, or
{"kind": "file", "path": "forces.txt"} with one dE value per line (entry t
drives the transition from step t to t+1; the file must cover the horizon).

Validation failures raise ConfigError with a dotted path to the offending
field, which the CLI prints and maps to exit code 1.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closedform import BProfile, generate_profile
from .errors import ConfigError
from .model import CrowdState, ForceSeries
from .rewards import REGIME_KINDS, TREND_MODES, RewardRegime

_MAX_SEED = 2**64 - 1


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(path, message)


def _get_number(obj: dict, key: str, path: str, default=None, required: bool = False):
    if key not in obj or obj[key] is None:
        _require(not required, f"{path}{key}", "is required")
        return default
    value = obj[key]
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{path}{key}", f"must be a number, got {value!r}")
    _require(math.isfinite(float(value)), f"{path}{key}", "must be finite")
    return float(value)


def _get_int(obj: dict, key: str, path: str, default=None, required: bool = False):
    if key not in obj or obj[key] is None:
        _require(not required, f"{path}{key}", "is required")
        return default
    value = obj[key]
    _require(isinstance(value, int) and not isinstance(value, bool),
             f"{path}{key}", f"must be an integer, got {value!r}")
    return int(value)


def _scalar_or_list(value, n: int, path: str, default: float = 0.0) -> np.ndarray:
    if value is None:
        return np.full(n, default)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        _require(math.isfinite(float(value)), path, "must be finite")
        return np.full(n, float(value))
    if isinstance(value, list):
        _require(len(value) == n, path, f"list must have n_agents={n} entries, got {len(value)}")
        arr = np.asarray(value, dtype=float)
        _require(bool(np.all(np.isfinite(arr))), path, "entries must be finite numbers")
        return arr
    raise ConfigError(path, f"must be a number or a list of numbers, got {type(value).__name__}")


@dataclass
class ScenarioConfig:
    """A fully validated and resolved scenario."""

    n_agents: int
    n_steps: int
    seed: int
    regime: RewardRegime
    b_coeffs: np.ndarray
    c_values: np.ndarray
    noise_sigma: np.ndarray
    drift_mu: np.ndarray
    force: ForceSeries
    dO_initial: float
    initial_wealth: np.ndarray
    snapshot_every: int
    resolved: dict = field(default_factory=dict)

    def build_state(self) -> CrowdState:
        return CrowdState(
            wealth=self.initial_wealth.copy(),
            b=self.b_coeffs.copy(),
            c=self.c_values.copy(),
            noise_sigma=self.noise_sigma.copy(),
            drift_mu=self.drift_mu.copy(),
            last_dO=self.dO_initial,
        )

    def with_seed(self, seed: int) -> "ScenarioConfig":
        cfg = ScenarioConfig(**{**self.__dict__, "seed": int(seed)})
        cfg.resolved = {**self.resolved, "seed": int(seed)}
        return cfg


def config_from_dict(doc: dict, base_dir: str = ".") -> ScenarioConfig:
    """Validate a parsed JSON document and resolve every default."""
    _require(isinstance(doc, dict), "", "config must be a JSON object")

    n_agents = _get_int(doc, "n_agents", "", required=True)
    _require(n_agents >= 2, "n_agents", f"must be >= 2, got {n_agents}")
    n_steps = _get_int(doc, "n_steps", "", required=True)
    _require(n_steps >= 0, "n_steps", f"must be >= 0, got {n_steps}")
    seed = _get_int(doc, "seed", "", required=True)
    _require(0 <= seed <= _MAX_SEED, "seed", "must be an unsigned 64-bit integer")
    snapshot_every = _get_int(doc, "snapshot_every", "", default=10)
    _require(snapshot_every >= 1, "snapshot_every", f"must be >= 1, got {snapshot_every}")

    regime_doc = doc.get("regime")
    _require(isinstance(regime_doc, dict), "regime", "must be an object")
    kind = regime_doc.get("kind")
    _require(kind in REGIME_KINDS, "regime.kind", f"must be one of {list(REGIME_KINDS)}, got {kind!r}")
    floor = _get_number(regime_doc, "floor", "regime.")
    if floor is not None:
        _require(floor >= 0.0, "regime.floor", "must be >= 0")
    shock_scale = _get_number(regime_doc, "shock_scale", "regime.")
    if kind in ("additive-random", "multiplicative-random"):
        _require(shock_scale is not None and shock_scale > 0.0,
                 "regime.shock_scale", "must be > 0 for random regimes")
    normalize = regime_doc.get("normalize_each_step", False)
    _require(isinstance(normalize, bool), "regime.normalize_each_step", "must be a boolean")
    trend_mode = regime_doc.get("trend_mode", "endogenous")
    _require(trend_mode in TREND_MODES,
             "regime.trend_mode", f"must be one of {list(TREND_MODES)}, got {trend_mode!r}")
    regime = RewardRegime(kind=kind, floor=floor, normalize_each_step=normalize,
                          shock_scale=shock_scale, trend_mode=trend_mode)

    profile_doc = doc.get("b_profile")
    if profile_doc is None:
        _require(kind in ("additive-random", "multiplicative-random"),
                 "b_profile", "is required for feedback regimes")
        b_coeffs = np.zeros(n_agents)
        profile_resolved = {"kind": "explicit", "values": "zeros"}
    else:
        _require(isinstance(profile_doc, dict), "b_profile", "must be an object")
        pkind = profile_doc.get("kind")
        _require(pkind in ("power_law", "linear_declining", "explicit"),
                 "b_profile.kind", f"unknown profile kind {pkind!r}")
        try:
            if pkind == "power_law":
                profile = BProfile(kind="power_law",
                                   c=_get_number(profile_doc, "c", "b_profile.", required=True),
                                   b=_get_number(profile_doc, "b", "b_profile.", required=True))
            elif pkind == "linear_declining":
                profile = BProfile(kind="linear_declining")
            else:
                values = profile_doc.get("values")
                _require(isinstance(values, list), "b_profile.values", "must be a list")
                profile = BProfile(kind="explicit", values=tuple(float(v) for v in values))
            b_coeffs = generate_profile(profile, n_agents)
        except ConfigError:
            raise
        except Exception as exc:  # profile construction errors carry the detail
            raise ConfigError("b_profile", str(exc))
        profile_resolved = {k: v for k, v in profile_doc.items()}

    c_values = _scalar_or_list(doc.get("c_value"), n_agents, "c_value", default=0.0)
    _require(bool(np.all(c_values >= 0.0)), "c_value", "must be >= 0")

    noise_doc = doc.get("noise") or {}
    _require(isinstance(noise_doc, dict), "noise", "must be an object")
    noise_sigma = _scalar_or_list(noise_doc.get("sigma"), n_agents, "noise.sigma", default=0.0)
    _require(bool(np.all(noise_sigma >= 0.0)), "noise.sigma", "must be >= 0")
    drift_mu = _scalar_or_list(noise_doc.get("mu"), n_agents, "noise.mu", default=0.0)

    force_doc = doc.get("external_force") or {"kind": "none"}
    _require(isinstance(force_doc, dict), "external_force", "must be an object")
    fkind = force_doc.get("kind", "none")
    if fkind == "none":
        force = ForceSeries.zero()
    elif fkind == "constant":
        value = _get_number(force_doc, "value", "external_force.", required=True)
        force = ForceSeries.const(value)
    elif fkind == "file":
        path = force_doc.get("path")
        _require(isinstance(path, str) and path != "", "external_force.path", "must be a file path")
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        _require(os.path.exists(full), "external_force.path", f"file not found: {full}")
        try:
            values = [float(line) for line in open(full)
                      if line.strip() and not line.lstrip().startswith("#")]
        except ValueError as exc:
            raise ConfigError("external_force.path", f"unparseable force value: {exc}")
        force = ForceSeries.from_values(values)
        _require(force.covers(n_steps), "external_force.path",
                 f"series has {len(values)} entries but the horizon needs {n_steps}")
    else:
        raise ConfigError("external_force.kind",
                          f"must be one of ['none', 'constant', 'file'], got {fkind!r}")

    dO_initial = _get_number(doc, "dO_initial", "", default=1.0)

    wealth_doc = doc.get("initial_wealth") or {"kind": "equal", "value": 1.0}
    _require(isinstance(wealth_doc, dict), "initial_wealth", "must be an object")
    wkind = wealth_doc.get("kind", "equal")
    if wkind == "equal":
        value = _get_number(wealth_doc, "value", "initial_wealth.", default=1.0)
        _require(value > 0.0, "initial_wealth.value", "must be > 0")
        initial_wealth = np.full(n_agents, value)
    elif wkind == "explicit":
        values = wealth_doc.get("values")
        _require(isinstance(values, list), "initial_wealth.values", "must be a list")
        initial_wealth = _scalar_or_list(values, n_agents, "initial_wealth.values")
        _require(bool(np.all(initial_wealth >= 0.0)), "initial_wealth.values", "must be >= 0")
    else:
        raise ConfigError("initial_wealth.kind",
                          f"must be 'equal' or 'explicit', got {wkind!r}")

    if floor is not None:
        _require(floor <= float(initial_wealth.min()), "regime.floor",
                 "must not exceed the minimum initial wealth")
    if kind == "multiplicative-random":
        _require(bool(np.all(initial_wealth > 0.0)), "initial_wealth",
                 "multiplicative-random requires strictly positive wealth")

    resolved = {
        "n_agents": n_agents,
        "n_steps": n_steps,
        "seed": seed,
        "snapshot_every": snapshot_every,
        "regime": {"kind": kind, "floor": floor, "shock_scale": shock_scale,
                   "normalize_each_step": normalize, "trend_mode": trend_mode},
        "b_profile": profile_resolved,
        "c_value": doc.get("c_value", 0.0),
        "noise": {"sigma": noise_doc.get("sigma", 0.0), "mu": noise_doc.get("mu", 0.0)},
        "external_force": force_doc,
        "dO_initial": dO_initial,
        "initial_wealth": wealth_doc,
    }

    return ScenarioConfig(
        n_agents=n_agents, n_steps=n_steps, seed=seed, regime=regime,
        b_coeffs=b_coeffs, c_values=c_values, noise_sigma=noise_sigma,
        drift_mu=drift_mu, force=force, dO_initial=dO_initial,
        initial_wealth=initial_wealth, snapshot_every=snapshot_every,
        resolved=resolved,
    )


def load_config(path: str) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON in {path}: {exc}")
    return config_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))
