"""Drift statistics for onset series: OLS trends, shift probabilities,
moving averages, and Pearson correlations with seasonal cutoffs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from statistics import NormalDist
from typing import Iterable, Mapping, Sequence

import numpy as np

_NORMAL = NormalDist()

STUDENTIZED_THRESHOLD = 2.5
MAX_AUTO_EXCLUSIONS = 5


@dataclass(frozen=True)
class TrendResult:
    """OLS line with its slope uncertainty and directional shift odds.

    slope is per unit of x (days/year for onset-vs-year fits; multiply by
    10 for days/decade). residual_var, x_mean, and sxx are kept so
    downstream code can build mean-prediction intervals.
    """

    slope: float
    intercept: float
    slope_stderr: float
    n: int
    direction: str
    shift_probability: float
    excluded_points: tuple[tuple[float, float], ...]
    residual_var: float
    x_mean: float
    sxx: float

    @property
    def slope_per_decade(self) -> float:
        return 10.0 * self.slope

    @property
    def stderr_per_decade(self) -> float:
        return 10.0 * self.slope_stderr

    def predict(self, x: float) -> float:
        return self.slope * x + self.intercept

    def mean_se(self, x: float) -> float:
        """Standard error of the fitted mean response at x."""
        return math.sqrt(
            self.residual_var * (1.0 / self.n + (x - self.x_mean) ** 2 / self.sxx)
        )


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n_used: int
    cutoff: object
    excluded_count: int
    excluded_years: tuple[int, ...] = ()


def shift_probability(slope: float, stderr: float, direction: str) -> float:
    """Probability that the trend moves in `direction` (earlier or later).

    Standard normal CDF of -slope/stderr for 'earlier' and +slope/stderr
    for 'later'. A zero stderr saturates to 0 or 1 by the slope sign
    (0.5 for a zero slope).
    """
    if direction not in ("earlier", "later"):
        raise ValueError(f"direction must be 'earlier' or 'later', got {direction!r}")
    if stderr < 0:
        raise ValueError("stderr must be >= 0")
    signed = -slope if direction == "earlier" else slope
    if stderr == 0:
        if signed > 0:
            return 1.0
        if signed < 0:
            return 0.0
        return 0.5
    return _NORMAL.cdf(signed / stderr)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float, float, float]:
    x_mean = float(x.mean())
    xc = x - x_mean
    sxx = float((xc * xc).sum())
    if sxx == 0:
        raise ValueError("degenerate abscissae: all x values identical")
    slope = float((xc * y).sum() / sxx)
    intercept = float(y.mean() - slope * x_mean)
    resid = y - (slope * x + intercept)
    dof = len(x) - 2
    s2 = float((resid * resid).sum() / dof) if dof > 0 else 0.0
    stderr = math.sqrt(s2 / sxx)
    return slope, intercept, stderr, s2, x_mean, sxx


def linear_trend(
    points: Iterable[tuple[float, float]] | Mapping[float, float],
    direction: str = "earlier",
    exclusions: Iterable[float] | None = None,
    auto_exclude: bool = False,
    max_auto_exclusions: int = MAX_AUTO_EXCLUSIONS,
    studentized_threshold: float = STUDENTIZED_THRESHOLD,
) -> TrendResult:
    """Least-squares line through (x, y) points with slope standard error.

    `exclusions` drops points by x value before fitting. With
    auto_exclude the fit iteratively trims the worst point whose
    studentized residual exceeds the threshold, up to the cap, refitting
    after each removal; all removed points are reported. At least 3
    points must remain.
    """
    if isinstance(points, Mapping):
        pts = sorted(points.items())
    else:
        pts = sorted(points)
    excluded: list[tuple[float, float]] = []
    if exclusions is not None:
        drop = set(exclusions)
        excluded = [p for p in pts if p[0] in drop]
        pts = [p for p in pts if p[0] not in drop]

    n_auto = 0
    while True:
        if len(pts) < 3:
            raise ValueError(f"need at least 3 points after exclusions, got {len(pts)}")
        x = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts], dtype=float)
        slope, intercept, stderr, s2, x_mean, sxx = _ols(x, y)
        if not auto_exclude or n_auto >= max_auto_exclusions or s2 == 0:
            break
        # Internally studentized residuals; leverage from the hat matrix.
        resid = y - (slope * x + intercept)
        leverage = 1.0 / len(x) + (x - x_mean) ** 2 / sxx
        scale = np.sqrt(s2 * np.maximum(1.0 - leverage, 1e-12))
        studentized = np.abs(resid) / scale
        worst = int(np.argmax(studentized))
        if studentized[worst] <= studentized_threshold or len(pts) <= 3:
            break
        excluded.append(pts.pop(worst))
        n_auto += 1

    return TrendResult(
        slope=slope,
        intercept=intercept,
        slope_stderr=stderr,
        n=len(pts),
        direction=direction,
        shift_probability=shift_probability(slope, stderr, direction),
        excluded_points=tuple(excluded),
        residual_var=s2,
        x_mean=x_mean,
        sxx=sxx,
    )


def confidence_band(
    result: TrendResult, xs: Iterable[float], level: float = 0.95
) -> list[tuple[float, float, float, float]]:
    """Pointwise mean-prediction band: (x, fit, low, high) per x."""
    z = _NORMAL.inv_cdf(0.5 + level / 2.0)
    out = []
    for x in xs:
        fit = result.predict(x)
        half = z * result.mean_se(x)
        out.append((x, fit, fit - half, fit + half))
    return out


def moving_average(
    points: Iterable[tuple[int, float]] | Mapping[int, float], k: int = 5
) -> list[tuple[int, float]]:
    """Centered k-year moving average, truncated at the series edges.

    The window spans years within +-(k-1)/2 of each point; years missing
    from the series simply contribute nothing.
    """
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be odd and >= 1, got {k}")
    if isinstance(points, Mapping):
        items = sorted(points.items())
    else:
        items = sorted(points)
    half = (k - 1) // 2
    out = []
    for year, _ in items:
        vals = [v for y, v in items if abs(y - year) <= half]
        out.append((year, sum(vals) / len(vals)))
    return out


def _as_day_value(value) -> float:
    if isinstance(value, date):
        return float(value.timetuple().tm_yday)
    return float(value)


def _compare_to_cutoff(value, cutoff) -> int:
    if isinstance(value, date) and isinstance(cutoff, date):
        a, b = (value.month, value.day), (cutoff.month, cutoff.day)
    elif isinstance(value, date) or isinstance(cutoff, date):
        raise TypeError("onsets and cutoff must both be dates or both be numbers")
    else:
        a, b = value, cutoff
    return (a > b) - (a < b)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    if denom == 0:
        raise ValueError("zero variance: correlation undefined")
    return float((xc * yc).sum() / denom)


def pearson_with_cutoff(
    x_onsets: Mapping[int, object],
    y_onsets: Mapping[int, object],
    season: str,
    cutoff,
) -> CorrelationResult:
    """Pearson r between paired onsets after a seasonal cutoff filter.

    Pairs whose x onset falls before the cutoff (spring) or after it
    (fall) are excluded; the comparison uses month and day only, so the
    cutoff year is irrelevant. Onsets may be dates or plain day numbers.
    """
    if season not in ("spring", "fall"):
        raise ValueError(f"season must be 'spring' or 'fall', got {season!r}")
    years = sorted(set(x_onsets) & set(y_onsets))
    kept_x: list[float] = []
    kept_y: list[float] = []
    excluded_years: list[int] = []
    for year in years:
        xv = x_onsets[year]
        cmp = _compare_to_cutoff(xv, cutoff)
        if (cmp < 0) if season == "spring" else (cmp > 0):
            excluded_years.append(year)
            continue
        kept_x.append(_as_day_value(xv))
        kept_y.append(_as_day_value(y_onsets[year]))
    if len(kept_x) < 3:
        raise ValueError(
            f"only {len(kept_x)} pairs remain after the cutoff; need at least 3"
        )
    return CorrelationResult(
        r=pearson(kept_x, kept_y),
        n_used=len(kept_x),
        cutoff=cutoff,
        excluded_count=len(excluded_years),
        excluded_years=tuple(excluded_years),
    )
