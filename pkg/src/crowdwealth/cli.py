"""crowdwealth command line interface.

Subcommands:
  simulate   run a configured scenario, write timeseries + wealth tables
  oracle     closed-form trend-following wealth profiles, no simulation
  analyze    distribution summary + pdf/ccdf/rank tables for a sample CSV
  ingest     convert a bucketed survey CSV to equal-width density buckets
  compare    numeric CSV comparison with a relative tolerance
  ensemble   run a scenario across consecutive seeds and pool the results

Exit codes: 0 success, 1 bad config/input, 2 unbounded run, 3 comparison
beyond tolerance. All outputs are deterministic for a given config and
seed: floats are written with repr (shortest exact round trip), JSON keys
are sorted, and no timestamps are recorded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import (
    ClassifyConfig,
    auto_width,
    ccdf,
    classify,
    classify_histogram,
    fit_loglog,
    gini,
    pdf_histogram,
    rank_curve,
    skewness,
    summarize,
)
from .closedform import BProfile, generate_profile, linear_declining_wealth, trendy_wealth
from .config import ScenarioConfig, load_config
from .errors import (
    ConfigError,
    CrowdWealthError,
    InsufficientDataError,
    InvalidInputError,
    SurveyFormatError,
    UnboundedRunError,
)
from .ingest import parse_survey, to_equal_buckets
from .scenario import WealthSeries, run_scenario


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; we reserve 2 for unbounded
    # runs, so usage problems are rerouted through the normal error path.
    def error(self, message):
        raise ConfigError("args", message)


def _fmt(value) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(value))


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write_text(path, buf.getvalue())


def _write_json(path: str, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_simulation_outputs(out_dir: str, cfg: ScenarioConfig, series: WealthSeries) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(
        os.path.join(out_dir, "timeseries.csv"),
        ("t", "dO", "D", "trend_sign", "gini", "top1_share", "top10_share"),
        (
            (
                int(series.t[i]),
                _fmt(series.dO[i]),
                _fmt(series.D[i]),
                int(series.trend_sign[i]),
                _fmt(series.gini[i]),
                _fmt(series.top1_share[i]),
                _fmt(series.top10_share[i]),
            )
            for i in range(series.n_recorded)
        ),
    )
    state = series.final_state
    total = float(state.wealth.sum())
    normalized = state.wealth / total if total > 0.0 else np.zeros_like(state.wealth)
    _write_csv(
        os.path.join(out_dir, "wealth_final.csv"),
        ("agent_id", "b", "wealth", "wealth_normalized"),
        (
            (i, _fmt(state.b[i]), _fmt(state.wealth[i]), _fmt(normalized[i]))
            for i in range(state.n_agents)
        ),
    )
    _write_csv(
        os.path.join(out_dir, "wealth_snapshots.csv"),
        ("t", "agent_id", "wealth"),
        (
            (int(t), i, _fmt(snapshot[i]))
            for t, snapshot in series.snapshots
            for i in range(snapshot.shape[0])
        ),
    )
    meta = {
        "config": cfg.resolved,
        "status": series.status,
        "rows_recorded": series.n_recorded,
        "final_t": int(series.t[series.n_recorded - 1]),
        "tool_version": __version__,
    }
    _write_json(os.path.join(out_dir, "run_meta.json"), meta)


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    series = run_scenario(cfg)
    _write_simulation_outputs(args.out, cfg, series)
    if series.status != "completed":
        print(
            f"run diverged at t={int(series.t[series.n_recorded - 1])}: "
            f"magnitudes exceeded the stability limit",
            file=sys.stderr,
        )
        return 2
    return 0


def _parse_values_list(text: str) -> List[float]:
    try:
        return [float(piece) for piece in text.split(",") if piece.strip() != ""]
    except ValueError:
        raise ConfigError("values", f"could not parse float list: {text!r}")


def _cmd_oracle(args) -> int:
    if args.steps < 0:
        raise ConfigError("steps", "steps must be >= 0")
    if args.profile == "power-law":
        if args.c is None or args.b is None:
            raise ConfigError("profile", "power-law profile needs --c and --b")
        profile = BProfile(kind="power_law", c=args.c, b=args.b)
        n_agents = args.n_agents
    elif args.profile == "linear-declining":
        profile = BProfile(kind="linear_declining")
        n_agents = args.n_agents
    else:
        if not args.values:
            raise ConfigError("profile", "explicit profile needs --values")
        values = _parse_values_list(args.values)
        profile = BProfile(kind="explicit", values=values)
        n_agents = len(values)
        if args.n_agents is not None and args.n_agents != n_agents:
            raise ConfigError("n_agents", "--n-agents disagrees with --values length")
    if n_agents is None:
        raise ConfigError("n_agents", "--n-agents is required")

    coeffs = generate_profile(profile, n_agents)
    if args.a0 is None:
        wealth = trendy_wealth(coeffs, args.steps)
    elif args.profile == "linear-declining":
        wealth = linear_declining_wealth(n_agents, args.steps, initial=args.a0)
    else:
        # a0 * (1 + b)^n, in log space to survive large step counts
        wealth = np.zeros(n_agents)
        alive = coeffs > -1.0
        wealth[alive] = args.a0 * np.exp(args.steps * np.log1p(coeffs[alive]))
    _write_csv(
        args.out,
        ("rank", "wealth"),
        ((i + 1, _fmt(wealth[i])) for i in range(n_agents)),
    )
    return 0


def _read_sample_column(path: str) -> np.ndarray:
    """Pull the sample column out of a CSV: 'wealth', then 'value', then the
    first column that is fully numeric and not an id/index."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ConfigError("input", f"cannot open input: {exc}")
    with handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise ConfigError("input", "input CSV has no data rows")
    header = [cell.strip() for cell in rows[0]]
    data = rows[1:]

    def column(idx: int) -> Optional[np.ndarray]:
        try:
            return np.array([float(row[idx]) for row in data])
        except (ValueError, IndexError):
            return None

    lowered = [name.lower() for name in header]
    for wanted in ("wealth", "value"):
        if wanted in lowered:
            values = column(lowered.index(wanted))
            if values is None:
                raise ConfigError("input", f"column {wanted!r} is not numeric")
            return values
    skip = {"t", "rank", "agent_id", "id", "index"}
    for idx, name in enumerate(lowered):
        if name in skip:
            continue
        values = column(idx)
        if values is not None:
            return values
    raise ConfigError("input", "no numeric sample column found")


def _parse_fit_range(text: Optional[str]) -> Optional[Tuple[float, float]]:
    if text is None:
        return None
    pieces = text.split(",")
    if len(pieces) != 2:
        raise ConfigError("fit-range", "expected lo,hi")
    try:
        lo, hi = float(pieces[0]), float(pieces[1])
    except ValueError:
        raise ConfigError("fit-range", f"could not parse: {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigError("fit-range", "need finite lo < hi")
    return lo, hi


def _cmd_analyze(args) -> int:
    samples = _read_sample_column(args.input)
    if samples.shape[0] == 0 or not np.all(np.isfinite(samples)):
        raise ConfigError("input", "samples must be non-empty and finite")
    fit_range = _parse_fit_range(args.fit_range)
    if args.width is not None:
        if args.width <= 0:
            raise ConfigError("width", "width must be > 0")
        width = args.width
    elif float(samples.max()) > float(samples.min()):
        width = auto_width(samples)
    else:
        width = 1.0  # constant sample; single degenerate bucket
    summary = summarize(samples, fit_range=fit_range, width=width, n_ranks=args.ranks)
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "summary.json"), summary)

    hist = pdf_histogram(samples, width)
    _write_csv(
        os.path.join(args.out, "pdf.csv"),
        ("bucket_lower", "bucket_upper", "density"),
        (
            (_fmt(hist.edges[k]), _fmt(hist.edges[k + 1]), _fmt(hist.densities[k]))
            for k in range(hist.n_buckets)
        ),
    )
    values, probs = ccdf(samples)
    _write_csv(
        os.path.join(args.out, "ccdf.csv"),
        ("value", "prob_greater"),
        ((_fmt(values[i]), _fmt(probs[i])) for i in range(values.shape[0])),
    )
    n_ranks = min(args.ranks, samples.shape[0])
    curve = rank_curve(samples, n_ranks)
    _write_csv(
        os.path.join(args.out, "rank.csv"),
        ("rank", "expected"),
        ((int(curve.ranks[i]), _fmt(curve.expected[i])) for i in range(n_ranks)),
    )
    return 0


def _cmd_ingest(args) -> int:
    if args.width <= 0:
        raise ConfigError("width", "width must be > 0")
    survey = parse_survey(args.input)
    hist = to_equal_buckets(survey, args.width, top_cap=args.top_cap)
    _write_csv(
        args.out,
        ("bucket_lower", "bucket_upper", "density"),
        (
            (_fmt(hist.edges[k]), _fmt(hist.edges[k + 1]), _fmt(hist.densities[k]))
            for k in range(hist.n_buckets)
        ),
    )
    return 0


def _read_csv_table(path: str) -> Tuple[List[str], List[List[str]]]:
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ConfigError("compare", f"cannot open {path}: {exc}")
    with handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise ConfigError("compare", f"{path} is empty")
    return [cell.strip() for cell in rows[0]], rows[1:]


def _cmd_compare(args) -> int:
    left_header, left_rows = _read_csv_table(args.left)
    right_header, right_rows = _read_csv_table(args.right)
    if args.tol < 0:
        raise ConfigError("tol", "tolerance must be >= 0")
    if len(left_rows) != len(right_rows):
        raise ConfigError(
            "compare",
            f"row count mismatch: {len(left_rows)} vs {len(right_rows)}",
        )

    if args.columns:
        pairs = []
        for piece in args.columns.split(","):
            if "=" in piece:
                l, r = piece.split("=", 1)
            else:
                l = r = piece
            pairs.append((l.strip(), r.strip()))
    else:
        pairs = [(name, name) for name in left_header if name in right_header]
        if not pairs:
            raise ConfigError("compare", "no shared columns to compare")

    left_idx = {name: i for i, name in enumerate(left_header)}
    right_idx = {name: i for i, name in enumerate(right_header)}
    for l, r in pairs:
        if l not in left_idx:
            raise ConfigError("columns", f"column {l!r} missing from {args.left}")
        if r not in right_idx:
            raise ConfigError("columns", f"column {r!r} missing from {args.right}")

    max_rel = 0.0
    worst_row = None
    worst_column = None
    for l, r in pairs:
        li, ri = left_idx[l], right_idx[r]
        for row_no, (lrow, rrow) in enumerate(zip(left_rows, right_rows)):
            try:
                lv = float(lrow[li])
                rv = float(rrow[ri])
            except (ValueError, IndexError):
                raise ConfigError(
                    "compare",
                    f"non-numeric cell in column pair {l}={r} at data row {row_no}",
                )
            denom = max(abs(lv), abs(rv))
            rel = 0.0 if denom == 0.0 else abs(lv - rv) / denom
            if rel > max_rel:
                max_rel = rel
                worst_row = row_no
                worst_column = f"{l}={r}"
    passed = max_rel <= args.tol
    report = {
        "rows": len(left_rows),
        "columns": [f"{l}={r}" for l, r in pairs],
        "tolerance": args.tol,
        "max_rel_diff": max_rel,
        "worst_row": worst_row,
        "worst_column": worst_column,
        "pass": passed,
    }
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0 if passed else 3


def _cmd_ensemble(args) -> int:
    if args.runs < 1:
        raise ConfigError("runs", "runs must be >= 1")
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    per_run = []
    tally: Dict[str, int] = {}
    finals: List[np.ndarray] = []
    any_unbounded = False
    for i in range(args.runs):
        seed = args.seed + i
        run_cfg = cfg.with_seed(seed)
        series = run_scenario(run_cfg)
        run_dir = os.path.join(args.out, f"run_{i:04d}")
        _write_simulation_outputs(run_dir, run_cfg, series)
        entry: dict = {"run": i, "seed": seed, "status": series.status}
        if series.status == "completed":
            wealth = series.final_state.wealth
            finals.append(wealth)
            entry["gini"] = float(series.gini[series.n_recorded - 1])
            entry["top1_share"] = float(series.top1_share[series.n_recorded - 1])
            entry["top10_share"] = float(series.top10_share[series.n_recorded - 1])
            positive = wealth[wealth > 0.0]
            if positive.shape[0] >= 3 and np.unique(positive).shape[0] >= 3:
                verdict = classify(positive)
                entry["verdict"] = verdict.verdict
                entry["scalefree_r_squared"] = verdict.scalefree_r_squared
                top = float(positive.max())
                try:
                    fit = fit_loglog(*ccdf(positive), fit_range=(top / 10.0, top))
                    entry["tail_slope"] = fit.slope
                    entry["tail_r_squared"] = fit.r_squared
                except (InsufficientDataError, InvalidInputError):
                    pass
            else:
                entry["verdict"] = "degenerate"
        else:
            any_unbounded = True
            entry["verdict"] = None
        if entry.get("verdict") is not None:
            tally[entry["verdict"]] = tally.get(entry["verdict"], 0) + 1
        per_run.append(entry)

    pooled_moments = None
    if finals:
        allw = np.concatenate(finals)
        pooled_moments = {
            "n": int(allw.shape[0]),
            "min": float(allw.min()),
            "max": float(allw.max()),
            "mean": float(allw.mean()),
            "std": float(allw.std()),
            "skewness": skewness(allw),
            "gini": gini(allw) if bool(np.all(allw >= 0.0)) and allw.max() > 0.0 else None,
        }
    pooled = {
        "runs": args.runs,
        "base_seed": args.seed,
        "statuses": {
            status: sum(1 for e in per_run if e["status"] == status)
            for status in sorted({e["status"] for e in per_run})
        },
        "classification_tally": dict(sorted(tally.items())),
        "pooled_moments": pooled_moments,
        "per_run": per_run,
    }
    _write_json(os.path.join(args.out, "pooled.json"), pooled)
    return 2 if any_unbounded else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowdwealth", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"crowdwealth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one scenario from a JSON config")
    p.add_argument("--config", required=True, help="path to scenario JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle", help="closed-form trend-following wealth profile")
    p.add_argument("--profile", required=True,
                   choices=("power-law", "linear-declining", "explicit"))
    p.add_argument("--c", type=float, default=None, help="power-law scale (0, 2]")
    p.add_argument("--b", type=float, default=None, help="power-law decay exponent > 0")
    p.add_argument("--values", default=None, help="comma-separated explicit coefficients")
    p.add_argument("--n-agents", type=int, default=None)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--a0", type=float, default=None,
                   help="initial wealth; omit for normalized shares")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("analyze", help="distribution summary for a sample CSV")
    p.add_argument("--input", required=True, help="CSV with a wealth/value column")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--width", type=float, default=None, help="histogram bucket width")
    p.add_argument("--ranks", type=int, default=100, help="rank curve buckets")
    p.add_argument("--fit-range", default=None, dest="fit_range",
                   help="tail fit range lo,hi (default: top decade)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("ingest", help="survey brackets to equal-width density buckets")
    p.add_argument("--input", required=True, help="survey CSV (lower,upper,share)")
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--top-cap", type=float, default=None, dest="top_cap",
                   help="cap for an open-ended top bracket")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("compare", help="compare two numeric CSVs")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--tol", type=float, required=True, help="max relative difference")
    p.add_argument("--columns", default=None,
                   help="comma list of LEFT=RIGHT column pairs (default: shared names)")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("ensemble", help="repeat a scenario across consecutive seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True, help="seed of run 0; run i uses seed+i")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1,
                   help="accepted for compatibility; runs execute sequentially")
    p.set_defaults(func=_cmd_ensemble)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error [{exc.field}]: {exc.message}", file=sys.stderr)
        return 1
    except SurveyFormatError as exc:
        print(f"survey error (row {exc.row}): {exc.message}", file=sys.stderr)
        return 1
    except (InvalidInputError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnboundedRunError as exc:
        print(f"unbounded run: {exc}", file=sys.stderr)
        return 2
    except CrowdWealthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
