"""Lowest-average sliding-window search over daily series.

A shoulder season is the run of `window_len` consecutive days (default
45) with the lowest mean value of a metric, searched once per half-year:
onsets in January-June define the spring season, onsets in July-December
the fall season. Windows may extend past the half boundary, and fall
windows may reach into the next calendar year when that data exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ingest import DEFAULT_MIN_HOURS, DailyLoadSummary

DEFAULT_WINDOW_LEN = 45
# A candidate window tolerates up to this many absent days; its mean is
# taken over the days that are present.
DEFAULT_MAX_MISSING = 3

_HALVES = {
    "first": ((1, 1), (6, 30), "spring"),
    "second": ((7, 1), (12, 31), "fall"),
}

METRICS = ("degree_days", "total_energy", "peak_demand")


@dataclass(frozen=True)
class ShoulderWindow:
    year: int
    season: str  # spring | fall
    metric: str  # degree_days | total_energy | peak_demand
    onset: date
    window_mean: float
    days_used: int

    @property
    def onset_doy(self) -> int:
        return self.onset.timetuple().tm_yday


def min_window(
    series: Mapping[date, float],
    year: int,
    half: str,
    window_len: int = DEFAULT_WINDOW_LEN,
    max_missing: int = DEFAULT_MAX_MISSING,
    allow_year_wrap: bool = True,
    metric: str = "value",
) -> ShoulderWindow:
    """Find the lowest-mean window of `window_len` days starting in `half`.

    Candidate onsets are every day of the half. A window is admissible
    when it ends inside the data domain and at least window_len -
    max_missing of its days are present. The domain ends on Dec 31 unless
    allow_year_wrap is set and the series carries next-year days, in
    which case it ends on the last such day. Ties resolve to the earliest
    onset. Raises ValueError when no candidate window is admissible.
    """
    if half not in _HALVES:
        raise ValueError(f"half must be 'first' or 'second', got {half!r}")
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    (m0, d0), (m1, d1), season = _HALVES[half]
    half_start = date(year, m0, d0)
    half_end = date(year, m1, d1)
    year_end = date(year, 12, 31)

    last_day = max(series) if series else half_start
    domain_end = last_day if (allow_year_wrap and last_day > year_end) else year_end
    span_end = min(domain_end, half_end + timedelta(days=window_len - 1))
    n_days = (span_end - half_start).days + 1
    if n_days < window_len:
        raise ValueError(
            f"no room for a {window_len}-day window in the {half} half of {year}"
        )

    values = np.full(n_days, np.nan)
    base = half_start.toordinal()
    for day, value in series.items():
        i = day.toordinal() - base
        if 0 <= i < n_days and value is not None and math.isfinite(value):
            values[i] = value
    present = np.isfinite(values)

    # Prefix sums give every window mean in one pass.
    csum = np.concatenate(([0.0], np.cumsum(np.where(present, values, 0.0))))
    ccount = np.concatenate(([0], np.cumsum(present)))

    n_onsets = min((half_end - half_start).days + 1, n_days - window_len + 1)
    best_i = -1
    best_mean = math.inf
    best_count = 0
    min_present = max(window_len - max_missing, 1)
    for i in range(n_onsets):
        count = int(ccount[i + window_len] - ccount[i])
        if count < min_present:
            continue
        mean = (csum[i + window_len] - csum[i]) / count
        if mean < best_mean:
            best_i, best_mean, best_count = i, mean, count
    if best_i < 0:
        raise ValueError(
            f"no admissible {window_len}-day window in the {half} half of {year} "
            f"(need >= {min_present} present days per window)"
        )
    return ShoulderWindow(
        year=year,
        season=season,
        metric=metric,
        onset=date.fromordinal(base + best_i),
        window_mean=float(best_mean),
        days_used=best_count,
    )


def load_metric_series(
    summaries: Iterable[DailyLoadSummary],
    metric: str,
    min_hours: int = DEFAULT_MIN_HOURS,
) -> dict[date, float]:
    """Daily series for one load metric; partial days become missing."""
    if metric == "total_energy":
        pick = lambda s: s.total_energy_mwh
    elif metric == "peak_demand":
        pick = lambda s: s.peak_demand_mw
    else:
        raise ValueError(f"unknown load metric {metric!r}")
    return {s.day: pick(s) for s in summaries if s.hours_present >= min_hours}


def shoulder_table(
    degree_day_series: Mapping[date, float] | None = None,
    load_summaries: Sequence[DailyLoadSummary] | None = None,
    years: Iterable[int] | None = None,
    window_len: int = DEFAULT_WINDOW_LEN,
    max_missing: int = DEFAULT_MAX_MISSING,
    allow_year_wrap: bool = True,
    min_hours: int = DEFAULT_MIN_HOURS,
) -> list[ShoulderWindow]:
    """One ShoulderWindow per (year, season, metric) with data present.

    Years absent from a series are skipped, as is a half-year with no
    data at all; a half that has data but no admissible window raises.
    Rows are ordered by year, then season (spring first), then metric.
    """
    by_metric: dict[str, Mapping[date, float]] = {}
    if degree_day_series is not None:
        by_metric["degree_days"] = degree_day_series
    if load_summaries is not None:
        for metric in ("total_energy", "peak_demand"):
            by_metric[metric] = load_metric_series(load_summaries, metric, min_hours)

    rows: list[ShoulderWindow] = []
    for metric, series in by_metric.items():
        data_years = {d.year for d in series}
        wanted = sorted(set(years) if years is not None else data_years)
        for year in wanted:
            if year not in data_years:
                continue
            for half in ("first", "second"):
                (m0, d0), (m1, d1), _ = _HALVES[half]
                lo, hi = date(year, m0, d0), date(year, m1, d1)
                if not any(lo <= d <= hi for d in series):
                    continue
                rows.append(
                    min_window(
                        series,
                        year,
                        half,
                        window_len=window_len,
                        max_missing=max_missing,
                        allow_year_wrap=allow_year_wrap,
                        metric=metric,
                    )
                )
    season_order = {"spring": 0, "fall": 1}
    rows.sort(key=lambda w: (w.year, season_order[w.season], w.metric))
    return rows
