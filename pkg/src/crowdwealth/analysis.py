"""Distribution analysis: histograms, tails, rank curves, and classification.

The classifier separates wealth distributions by the shape of their lower
tail, which is where the interesting differences live:

* interior-peak           symmetric hump (additive / normal-like)
* interior-peak-skewed    hump that is symmetric in log space (lognormal-like)
* boundary-peak           mass piled against the lower boundary
* boundary-peak-scalefree boundary pile whose density is a straight line in
                          log-log over its whole occupied range (power law)
* degenerate              fewer than three distinct values

Exponent bookkeeping: a tail can be quoted as a PDF exponent a (density ~
x**-a), a CCDF exponent k (P[X > x] ~ x**-k), or a rank exponent b (wealth ~
rank**-b). They are views of one quantity: a = 1 + k and k = 1 / b.

All-positive samples spanning more than a couple of decades are assessed in
log space, where the peak-position test actually distinguishes a wide
lognormal (interior hump in log) from a true boundary pile (still stuck at
the first bucket in log). Published histograms stay fixed-width; log-spaced
buckets are used only for tail/straightness fits, where equal-width buckets
would starve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientDataError, InvalidInputError

VERDICTS = (
    "interior-peak",
    "interior-peak-skewed",
    "boundary-peak",
    "boundary-peak-scalefree",
    "degenerate",
)

_MAX_PDF_BUCKETS = 50_000_000  # hard guard against absurd width/range combos


def _clean_samples(values, name: str = "samples") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Histogram:
    """Uniform-width density histogram; densities integrate to 1."""

    edges: np.ndarray
    densities: np.ndarray
    n_samples: int

    def __post_init__(self):
        if self.edges.ndim != 1 or self.edges.shape[0] < 2:
            raise InvalidInputError("histogram needs at least one bucket")
        if self.densities.shape[0] != self.edges.shape[0] - 1:
            raise InvalidInputError("densities must have one entry per bucket")
        widths = np.diff(self.edges)
        if np.any(widths <= 0.0):
            raise InvalidInputError("edges must be strictly increasing")
        if not np.allclose(widths, widths[0], rtol=1e-9, atol=0.0):
            raise InvalidInputError("buckets must have uniform width")

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def n_buckets(self) -> int:
        return int(self.densities.shape[0])

    def total_mass(self) -> float:
        return float(np.sum(self.densities) * self.width)


@dataclass(frozen=True)
class RankCurve:
    """Expected wealth per rank bucket, rank 1 = wealthiest."""

    ranks: np.ndarray
    expected: np.ndarray


@dataclass(frozen=True)
class TailFit:
    """Least-squares line through (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float
    fit_range: Tuple[float, float]
    n_points: int
    zero_variance: bool = False


@dataclass(frozen=True)
class ConcentrationProfile:
    """Discrete falling/convexity diagnostics of a density histogram."""

    first_diffs: np.ndarray
    second_diffs: np.ndarray
    convexity_score: float


@dataclass(frozen=True)
class ClassifyConfig:
    """Thresholds of the classification rule. All knobs in one place.

    peak_window: how close to the lower edge (as a fraction of the occupied
      span) the mode must sit to count as a boundary peak.
    convexity_min: minimum fraction of interior buckets that are both
      falling and convex for a confident boundary verdict.
    scalefree_r2: minimum R^2 of the full-range log-log density fit to call
      a boundary pile scale-free.
    skew_max: |skewness| bound for the symmetric-hump checks.
    log_span_decades: all-positive data spanning more than this many decades
      is shape-tested in log space.
    trim_tail_mass: fraction of total mass trimmed off the sparse top end
      before the shape test (keeps single-sample far-tail buckets from
      drowning the score).
    shape_buckets: bucket count for the peak/convexity test. Kept modest on
      purpose: per-bucket second differences at fine widths are sampling
      noise, wide buckets make the curvature visible.
    max_buckets: cap on automatic bucket counts.
    synth_points: sample budget when classifying from a histogram.
    """

    peak_window: float = 0.05
    convexity_min: float = 0.7
    scalefree_r2: float = 0.98
    skew_max: float = 0.2
    log_span_decades: float = 2.0
    trim_tail_mass: float = 0.002
    shape_buckets: int = 24
    max_buckets: int = 4096
    fit_bins_per_decade: int = 8
    synth_points: int = 100_000


@dataclass(frozen=True)
class Classification:
    """Verdict plus the measurements that produced it."""

    verdict: str
    peak_fraction: Optional[float] = None
    convexity_score: Optional[float] = None
    skew_raw: Optional[float] = None
    skew_log: Optional[float] = None
    scalefree_r_squared: Optional[float] = None
    log_domain: bool = False

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "peak_fraction": self.peak_fraction,
            "convexity_score": self.convexity_score,
            "skew_raw": self.skew_raw,
            "skew_log": self.skew_log,
            "scalefree_r_squared": self.scalefree_r_squared,
            "log_domain": self.log_domain,
        }


def pdf_histogram(samples, width: float) -> Histogram:
    """Fixed-width density histogram with edges aligned to multiples of width.

    The first edge is floor(min / width) * width, so histograms of different
    samples from the same population share a grid. Densities are
    count / (n * width) and integrate to 1.
    """
    samples = _clean_samples(samples)
    if not (np.isfinite(width) and width > 0.0):
        raise InvalidInputError("width must be > 0")
    mn = float(samples.min())
    mx = float(samples.max())
    first = math.floor(mn / width)
    last = math.floor(mx / width)
    if (last - first + 1) > _MAX_PDF_BUCKETS:
        raise InvalidInputError("width is too small for the data range")
    start = first * width
    if start > mn:  # rare rounding of mn / width
        start -= width
    n_buckets = last - math.floor(start / width) + 1
    edges = start + width * np.arange(n_buckets + 1, dtype=float)
    while edges[-1] <= mx:  # ditto at the top
        edges = np.append(edges, edges[-1] + width)
    counts, _ = np.histogram(samples, bins=edges)
    densities = counts / (samples.shape[0] * width)
    return Histogram(edges=edges, densities=densities, n_samples=int(samples.shape[0]))


def ccdf(samples) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical complementary CDF: P[X > x] at each distinct sample value.

    The largest value maps to probability 0 (strictly-greater convention).
    """
    samples = _clean_samples(samples)
    ordered = np.sort(samples)
    values = np.unique(ordered)
    at_most = np.searchsorted(ordered, values, side="right")
    probs = 1.0 - at_most / ordered.shape[0]
    return values, probs


def rank_curve(samples, n_ranks: int) -> RankCurve:
    """Average wealth in n_ranks near-equal buckets of the descending sort.

    Bucket sizes differ by at most one; expected values are non-increasing.
    """
    samples = _clean_samples(samples)
    if not 1 <= n_ranks <= samples.shape[0]:
        raise InvalidInputError(
            f"n_ranks must be between 1 and the sample count, got {n_ranks}"
        )
    ordered = np.sort(samples)[::-1]
    chunks = np.array_split(ordered, n_ranks)
    expected = np.array([float(chunk.mean()) for chunk in chunks])
    return RankCurve(ranks=np.arange(1, n_ranks + 1), expected=expected)


def fit_loglog(x, y, fit_range: Optional[Tuple[float, float]] = None) -> TailFit:
    """Least-squares straight line through (log10 x, log10 y).

    Points with x <= 0 or y <= 0 (and points outside fit_range, when given)
    are dropped before fitting; at least 3 must survive. A constant y gives
    slope 0 and is flagged zero_variance with R^2 reported as 0.
    """
    x = _clean_samples(x, "x")
    y = _clean_samples(y, "y")
    if x.shape != y.shape:
        raise InvalidInputError("x and y must have the same length")
    keep = (x > 0.0) & (y > 0.0)
    if fit_range is not None:
        lo, hi = float(fit_range[0]), float(fit_range[1])
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise InvalidInputError("fit_range must be a finite (lo, hi) with lo < hi")
        keep &= (x >= lo) & (x <= hi)
    xs = x[keep]
    ys = y[keep]
    if xs.shape[0] < 3:
        raise InsufficientDataError(
            f"log-log fit needs at least 3 usable points, got {xs.shape[0]}"
        )
    lx = np.log10(xs)
    ly = np.log10(ys)
    used_range = (float(xs.min()), float(xs.max())) if fit_range is None else (lo, hi)
    if np.ptp(ly) == 0.0:
        return TailFit(slope=0.0, intercept=float(ly[0]), r_squared=0.0,
                       fit_range=used_range, n_points=int(xs.shape[0]),
                       zero_variance=True)
    if np.ptp(lx) == 0.0:
        raise InvalidInputError("all x collapse to one log-log abscissa; cannot fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    predicted = slope * lx + intercept
    ss_res = float(np.sum((ly - predicted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot
    return TailFit(slope=float(slope), intercept=float(intercept),
                   r_squared=float(r_squared), fit_range=used_range,
                   n_points=int(xs.shape[0]), zero_variance=False)


_EXPONENT_ALIASES = {
    "pdf": "pdf", "a": "pdf", "density": "pdf",
    "ccdf": "ccdf", "k": "ccdf", "pareto": "ccdf",
    "rank": "rank", "b": "rank", "zipf": "rank",
}


def convert_exponents(value: float, source: str, target: str) -> float:
    """Convert a tail exponent between its pdf / ccdf / rank representations.

    pdf exponent a, ccdf exponent k, and rank exponent b are linked by
    a = 1 + k and k = 1 / b. Conversions that would divide by zero raise.
    """
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise InvalidInputError("exponent value must be a finite number")
    try:
        src = _EXPONENT_ALIASES[source.lower()]
        dst = _EXPONENT_ALIASES[target.lower()]
    except (KeyError, AttributeError):
        raise InvalidInputError(
            f"exponent representations are 'pdf', 'ccdf', 'rank'; got {source!r}/{target!r}"
        )
    value = float(value)
    if src == dst:
        return value
    if src == "pdf":
        k = value - 1.0
    elif src == "rank":
        if value == 0.0:
            raise InvalidInputError("rank exponent 0 has no ccdf/pdf counterpart")
        k = 1.0 / value
    else:
        k = value
    if dst == "pdf":
        return 1.0 + k
    if dst == "rank":
        if k == 0.0:
            raise InvalidInputError("ccdf exponent 0 has no rank counterpart")
        return 1.0 / k
    return k


def gini(values) -> float:
    """Gini coefficient via the sorted-rank formula.

    G = sum_i (2i - n - 1) * x_(i) / (n * sum x) over the ascending sort.
    Requires non-negative values with a positive total. An all-equal vector
    returns exactly 0.0.
    """
    values = _clean_samples(values, "values")
    if np.any(values < 0.0):
        raise InvalidInputError("gini requires non-negative values")
    total = float(values.sum())
    if total <= 0.0:
        raise InvalidInputError("gini requires at least one positive value")
    sw = np.sort(values)
    if sw[0] == sw[-1]:
        return 0.0
    n = sw.shape[0]
    coeffs = 2.0 * np.arange(1, n + 1, dtype=float) - n - 1.0
    return float(coeffs @ sw) / (n * total)


def skewness(values) -> float:
    """Population skewness (third standardized moment); 0 for constant input."""
    values = _clean_samples(values, "values")
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        return 0.0
    m3 = float(np.mean(centered**3))
    return m3 / m2**1.5


def concentration_profile(hist: Histogram) -> ConcentrationProfile:
    """Score how boundary-concentrated a histogram is.

    An interior bucket j passes when the density is locally falling
    (d[j+1] < d[j]) and convex (d[j+1] - 2 d[j] + d[j-1] > 0); the
    convexity_score is the passing fraction. A monotone decreasing convex
    profile scores 1.0; a symmetric hump scores well under 0.5.
    """
    if hist.n_buckets < 3:
        raise InsufficientDataError("concentration profile needs at least 3 buckets")
    d = hist.densities
    first_diffs = np.diff(d)
    second_diffs = np.diff(d, n=2)
    passing = (first_diffs[1:] < 0.0) & (second_diffs > 0.0)
    score = float(np.count_nonzero(passing)) / passing.shape[0]
    return ConcentrationProfile(first_diffs=first_diffs, second_diffs=second_diffs,
                                convexity_score=score)


def auto_width(values, cfg: ClassifyConfig = ClassifyConfig()) -> float:
    """Freedman-Diaconis width, capped so bucket counts stay bounded."""
    values = _clean_samples(values, "values")
    span = float(values.max() - values.min())
    if span == 0.0:
        raise InvalidInputError("cannot pick a width for constant values")
    q75, q25 = np.percentile(values, [75, 25])
    width = 2.0 * (q75 - q25) / values.shape[0] ** (1.0 / 3.0)
    if width <= 0.0:
        width = span / 64.0
    return max(width, span / cfg.max_buckets)


def _shape_profile(
    densities: np.ndarray, width: float, trim_tail_mass: float
) -> Tuple[float, float]:
    """(peak_fraction, convexity_score) over the mass-trimmed occupied span."""
    d = densities
    occupied = np.nonzero(d > 0.0)[0]
    first = int(occupied[0])
    last = int(occupied[-1])
    if trim_tail_mass > 0.0 and last > first:
        mass = d * width
        cum = np.cumsum(mass)
        cutoff = cum[-1] * (1.0 - trim_tail_mass)
        trimmed = int(np.searchsorted(cum, cutoff))
        last = max(first, min(last, trimmed))
    span = d[first : last + 1]
    peak = int(np.argmax(span))
    peak_fraction = peak / (span.shape[0] - 1) if span.shape[0] > 1 else 0.0
    if span.shape[0] >= 3:
        fd = np.diff(span)
        sd = np.diff(span, n=2)
        passing = (fd[1:] < 0.0) & (sd > 0.0)
        convexity = float(np.count_nonzero(passing)) / passing.shape[0]
    else:
        convexity = 0.0
    return peak_fraction, convexity


def _log_binned_straightness(samples: np.ndarray, cfg: ClassifyConfig) -> Optional[TailFit]:
    """Full-range density fit on log-spaced buckets; None when unfittable."""
    lo = float(samples.min())
    hi = float(samples.max())
    if lo <= 0.0 or hi <= lo:
        return None
    decades = math.log10(hi / lo)
    n_bins = max(12, int(math.ceil(decades * cfg.fit_bins_per_decade)))
    edges = np.geomspace(lo, hi, n_bins + 1)
    edges[-1] = np.nextafter(hi, np.inf)  # keep the max sample inside
    counts, _ = np.histogram(samples, bins=edges)
    widths = np.diff(edges)
    dens = counts / (samples.shape[0] * widths)
    centers = np.sqrt(edges[:-1] * edges[1:])
    try:
        return fit_loglog(centers, dens)
    except (InsufficientDataError, InvalidInputError):
        return None


def classify(samples, cfg: ClassifyConfig = ClassifyConfig()) -> Classification:
    """Classify a sample's distribution shape. See the module docstring.

    Rule: a peak within peak_window of the lower edge of the occupied span
    with a convex falling profile is a boundary pile (scale-free when the
    full-range log-log density fit is straight enough); an interior peak is
    lognormal-like if the log-values pass the symmetry check, normal-like if
    the raw values do; anything else falls back to whichever of
    boundary/interior the peak position is nearer.
    """
    samples = _clean_samples(samples)
    if np.unique(samples).shape[0] < 3:
        return Classification(verdict="degenerate")

    positive = bool(samples.min() > 0.0)
    log_values = np.log(samples) if positive else None
    use_log = (
        positive
        and math.log10(float(samples.max()) / float(samples.min())) > cfg.log_span_decades
    )
    shape_values = log_values if use_log else samples
    span = float(shape_values.max() - shape_values.min())
    shape_width = max(auto_width(shape_values, cfg), span / cfg.shape_buckets)
    # The grid is anchored at the sample minimum (not floor-aligned like the
    # published histograms) so a mass atom at the lower boundary cannot sit
    # mid-bucket and push the apparent peak into the second bucket.
    nb = max(1, int(math.ceil(span / shape_width - 1e-9)))
    edges = float(shape_values.min()) + shape_width * np.arange(nb + 1, dtype=float)
    if edges[-1] < shape_values.max():
        edges[-1] = np.nextafter(float(shape_values.max()), np.inf)
    counts, _ = np.histogram(shape_values, bins=edges)
    dens = counts / (shape_values.shape[0] * shape_width)
    peak_fraction, convexity = _shape_profile(dens, shape_width, cfg.trim_tail_mass)

    skew_raw = skewness(samples)
    skew_log = skewness(log_values) if positive else None
    sf_fit = _log_binned_straightness(samples, cfg) if positive else None
    sf_r2 = None
    if sf_fit is not None and not sf_fit.zero_variance:
        sf_r2 = sf_fit.r_squared

    if peak_fraction <= cfg.peak_window and convexity >= cfg.convexity_min:
        verdict = (
            "boundary-peak-scalefree"
            if sf_r2 is not None and sf_r2 >= cfg.scalefree_r2
            else "boundary-peak"
        )
    elif peak_fraction > cfg.peak_window:
        if skew_log is not None and abs(skew_log) < cfg.skew_max:
            verdict = "interior-peak-skewed"
        elif abs(skew_raw) < cfg.skew_max:
            verdict = "interior-peak"
        else:
            verdict = _nearest_verdict(peak_fraction, skew_raw, cfg)
    else:
        verdict = _nearest_verdict(peak_fraction, skew_raw, cfg)

    return Classification(
        verdict=verdict,
        peak_fraction=peak_fraction,
        convexity_score=convexity,
        skew_raw=skew_raw,
        skew_log=skew_log,
        scalefree_r_squared=sf_r2,
        log_domain=use_log,
    )


def _nearest_verdict(peak_fraction: float, skew_raw: float, cfg: ClassifyConfig) -> str:
    # peak closer to the lower edge than to the middle reads as a pile
    if peak_fraction < 0.25:
        return "boundary-peak"
    return "interior-peak-skewed" if abs(skew_raw) >= cfg.skew_max else "interior-peak"


def synthesize_samples(hist: Histogram, n_points: int = 100_000) -> np.ndarray:
    """Deterministic point sample reproducing a histogram's mass profile.

    Each bucket contributes round(n_points * mass_share) points spread
    evenly across its interior. No randomness: the same histogram always
    yields the same points, so downstream fits and verdicts are repeatable.
    """
    if n_points < 1:
        raise InvalidInputError("n_points must be >= 1")
    mass = hist.densities * hist.width
    total = float(mass.sum())
    if total <= 0.0:
        raise InvalidInputError("histogram has no mass")
    points = []
    for k in range(hist.n_buckets):
        count = int(round(n_points * mass[k] / total))
        if count <= 0:
            continue
        lo = hist.edges[k]
        points.append(lo + (np.arange(count) + 0.5) * (hist.width / count))
    if not points:
        raise InvalidInputError("histogram has no occupied buckets")
    return np.concatenate(points)


def classify_histogram(hist: Histogram, cfg: ClassifyConfig = ClassifyConfig()) -> Classification:
    """Classify a distribution given only its equal-width histogram.

    Deterministically resamples the histogram (synthesize_samples) and
    classifies the points, so the verdict rule is identical to classify().
    """
    return classify(synthesize_samples(hist, cfg.synth_points), cfg)


def _fit_as_dict(x, y, fit_range) -> Optional[dict]:
    try:
        fit = fit_loglog(x, y, fit_range=fit_range)
    except (InsufficientDataError, InvalidInputError):
        return None
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "fit_range": [fit.fit_range[0], fit.fit_range[1]],
        "n_points": fit.n_points,
        "zero_variance": fit.zero_variance,
    }


_INLINE_BUCKET_CAP = 2048
_CCDF_INLINE_POINTS = 257


def summarize(
    samples,
    cfg: ClassifyConfig = ClassifyConfig(),
    fit_range: Optional[Tuple[float, float]] = None,
    width: Optional[float] = None,
    n_ranks: int = 100,
) -> dict:
    """Full JSON-ready distribution summary.

    Contains moments, Gini (when defined), the classification verdict with
    its evidence, the equal-width histogram, a thinned CCDF, the rank curve,
    and a log-log fit per representation (pdf, ccdf, rank). The pdf and ccdf
    fits run over fit_range, defaulting to the top decade (max/10, max); the
    rank fit spans all rank buckets. The exponent triple is derived from the
    CCDF fit via a = 1 + k, b = 1/k.
    """
    samples = _clean_samples(samples)
    n = samples.shape[0]
    positive = bool(samples.min() > 0.0)
    span = float(samples.max() - samples.min())
    if width is None:
        width = auto_width(samples, cfg) if span > 0.0 else 1.0
    elif not (math.isfinite(width) and width > 0.0):
        raise InvalidInputError("width must be > 0")

    hist = pdf_histogram(samples, width)
    xs, ps = ccdf(samples)
    ranks = min(int(n_ranks), n)
    curve = rank_curve(samples, ranks) if ranks >= 1 else None

    if fit_range is None and float(samples.max()) > 0.0:
        top = float(samples.max())
        fit_range = (top / 10.0, top)

    fits = {
        "pdf": _fit_as_dict(hist.centers, hist.densities, fit_range),
        "ccdf": _fit_as_dict(xs, ps, fit_range),
        "rank": _fit_as_dict(curve.ranks.astype(float), curve.expected, None)
        if curve is not None
        else None,
    }
    exponents = None
    if fits["ccdf"] is not None and not fits["ccdf"]["zero_variance"]:
        k = -fits["ccdf"]["slope"]
        if k > 0.0:
            exponents = {
                "ccdf_k": k,
                "pdf_a": convert_exponents(k, "ccdf", "pdf"),
                "rank_b": convert_exponents(k, "ccdf", "rank"),
            }

    if hist.n_buckets <= _INLINE_BUCKET_CAP:
        hist_block: dict = {
            "width": hist.width,
            "n_buckets": hist.n_buckets,
            "edges": [float(e) for e in hist.edges],
            "densities": [float(d) for d in hist.densities],
        }
    else:  # too large to inline; pdf.csv carries the full table
        hist_block = {"width": hist.width, "n_buckets": hist.n_buckets}

    if xs.shape[0] > _CCDF_INLINE_POINTS:
        idx = np.unique(np.linspace(0, xs.shape[0] - 1, _CCDF_INLINE_POINTS).astype(int))
        ccdf_block = {
            "n_points": int(xs.shape[0]),
            "thinned": True,
            "values": [float(v) for v in xs[idx]],
            "probs": [float(p) for p in ps[idx]],
        }
    else:
        ccdf_block = {
            "n_points": int(xs.shape[0]),
            "thinned": False,
            "values": [float(v) for v in xs],
            "probs": [float(p) for p in ps],
        }

    return {
        "n": int(n),
        "moments": {
            "min": float(samples.min()),
            "max": float(samples.max()),
            "mean": float(samples.mean()),
            "median": float(np.median(samples)),
            "std": float(samples.std()),
            "skewness": skewness(samples),
            "log_skewness": skewness(np.log(samples)) if positive else None,
        },
        "gini": gini(samples) if np.all(samples >= 0.0) and samples.max() > 0.0 else None,
        "classification": classify(samples, cfg).as_dict(),
        "histogram": hist_block,
        "ccdf": ccdf_block,
        "rank_curve": {
            "ranks": [int(r) for r in curve.ranks],
            "expected": [float(v) for v in curve.expected],
        }
        if curve is not None
        else None,
        "fits": fits,
        "exponents": exponents,
    }
