"""Ingestion of bucketed survey tables into analysis-ready histograms.

Input format: CSV with header lower,upper,share; one row per bucket, buckets
contiguous and ascending, shares summing to 1 within 1e-3 (renormalized to
exactly 1 on load). The last bucket may be open-ended with upper = inf, in
which case conversion to equal-width buckets needs an explicit cap.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import Histogram
from .errors import SurveyFormatError

_HEADER = ("lower", "upper", "share")
_SHARE_SUM_TOL = 1e-3


@dataclass(frozen=True)
class BucketedSurvey:
    """Population shares over contiguous wealth brackets."""

    lower: np.ndarray
    upper: np.ndarray
    share: np.ndarray
    source_label: str = ""
    value_unit: str = ""

    @property
    def n_buckets(self) -> int:
        return int(self.share.shape[0])

    @property
    def open_ended(self) -> bool:
        return bool(math.isinf(self.upper[-1]))


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SurveyFormatError(row, f"column {column!r} is not a number: {text!r}")


def parse_survey(path: str) -> BucketedSurvey:
    """Load and validate a bucketed survey CSV.

    Raises SurveyFormatError (with a 1-based row number) on a bad header,
    non-numeric fields, lower >= upper, gaps or overlaps between buckets, a
    non-final open-ended bucket, or shares that do not sum to 1 within 1e-3.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise SurveyFormatError(0, f"cannot open survey file: {exc}")
    with handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise SurveyFormatError(0, "survey file is empty")
    header = tuple(cell.strip().lower() for cell in rows[0])
    if header != _HEADER:
        raise SurveyFormatError(1, f"header must be lower,upper,share; got {','.join(header)}")
    if len(rows) < 2:
        raise SurveyFormatError(1, "survey has no data rows")

    lowers, uppers, shares = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise SurveyFormatError(i, f"expected 3 columns, got {len(row)}")
        lo = _parse_float(row[0].strip(), i, "lower")
        hi = _parse_float(row[1].strip(), i, "upper")
        sh = _parse_float(row[2].strip(), i, "share")
        if math.isnan(lo) or math.isnan(hi) or not math.isfinite(sh):
            raise SurveyFormatError(i, "NaN or infinite share is not allowed")
        if math.isinf(lo):
            raise SurveyFormatError(i, "lower bound must be finite")
        if sh < 0.0:
            raise SurveyFormatError(i, f"share must be non-negative, got {sh}")
        if not lo < hi:
            raise SurveyFormatError(i, f"bucket must satisfy lower < upper, got [{lo}, {hi})")
        lowers.append(lo)
        uppers.append(hi)
        shares.append(sh)

    for j in range(1, len(lowers)):
        if math.isinf(uppers[j - 1]):
            raise SurveyFormatError(j + 1, "open-ended bucket must be the last row")
        if uppers[j - 1] != lowers[j]:
            raise SurveyFormatError(
                j + 2,
                f"buckets must be contiguous: previous upper {uppers[j - 1]} "
                f"!= lower {lowers[j]}",
            )

    total = float(sum(shares))
    if abs(total - 1.0) > _SHARE_SUM_TOL:
        raise SurveyFormatError(
            len(rows), f"shares sum to {total:.6f}, outside 1 +/- {_SHARE_SUM_TOL}"
        )
    share_arr = np.asarray(shares, dtype=float) / total
    return BucketedSurvey(
        lower=np.asarray(lowers, dtype=float),
        upper=np.asarray(uppers, dtype=float),
        share=share_arr,
        source_label=os.path.basename(path),
    )


def to_equal_buckets(
    survey: BucketedSurvey, width: float, top_cap: Optional[float] = None
) -> Histogram:
    """Re-bucket a survey onto a uniform grid of the given width.

    Mass is spread uniformly inside each source bracket (linear CDF
    interpolation), which preserves total mass exactly up to rounding. An
    open-ended survey requires top_cap (the open bucket's mass is packed
    into [last lower, top_cap)); a closed survey must not pass one.
    """
    if not (math.isfinite(width) and width > 0.0):
        raise SurveyFormatError(0, "width must be > 0")
    uppers = survey.upper.copy()
    if survey.open_ended:
        if top_cap is None:
            raise SurveyFormatError(
                0, "survey has an open-ended top bucket; top_cap is required"
            )
        if not (math.isfinite(top_cap) and top_cap > survey.lower[-1]):
            raise SurveyFormatError(
                0,
                f"top_cap must be finite and exceed the last lower bound "
                f"{survey.lower[-1]}",
            )
        uppers[-1] = float(top_cap)
    elif top_cap is not None:
        raise SurveyFormatError(0, "top_cap is only valid for open-ended surveys")

    # piecewise-linear CDF over the source bracket edges
    cdf_x = np.concatenate(([survey.lower[0]], uppers))
    cdf_y = np.concatenate(([0.0], np.cumsum(survey.share)))
    cdf_y[-1] = 1.0

    start = math.floor(cdf_x[0] / width) * width
    if start > cdf_x[0]:
        start -= width
    n_buckets = int(math.ceil((cdf_x[-1] - start) / width))
    edges = start + width * np.arange(n_buckets + 1, dtype=float)
    while edges[-1] < cdf_x[-1]:
        edges = np.append(edges, edges[-1] + width)

    cdf_at_edges = np.interp(edges, cdf_x, cdf_y, left=0.0, right=1.0)
    mass = np.diff(cdf_at_edges)
    densities = mass / width
    # synthetic sample count: just a carrier for the density normalization
    return Histogram(edges=edges, densities=densities, n_samples=survey.n_buckets)
