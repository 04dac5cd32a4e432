"""Maintenance-headroom arithmetic: period outage averages, the
shoulder-vs-winter outage increment, unmet-demand fractions under extra
planned outages, and generation-output histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .ingest import OutageRecord

MW_PER_GW = 1000.0

# A period is one (start, end) date pair or several of them pooled; all
# bounds read as closed intervals.
DateRange = tuple[date, date]


def _as_ranges(period: DateRange | Sequence[DateRange]) -> list[DateRange]:
    if isinstance(period, tuple) and len(period) == 2 and isinstance(period[0], date):
        return [period]  # type: ignore[list-item]
    ranges = list(period)  # type: ignore[arg-type]
    if not ranges:
        raise ValueError("period has no date ranges")
    return ranges


@dataclass(frozen=True)
class PeriodOutageStat:
    label: str
    start: date
    end: date
    mean_outage_gw: float
    n_records: int


@dataclass(frozen=True)
class AdequacyResult:
    label: str
    max_output_gw: float
    extra_outage_gw: float
    pct_unmet: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.pct_unmet <= 100.0:
            raise ValueError(f"pct_unmet out of range: {self.pct_unmet}")


@dataclass(frozen=True)
class GenerationHistogram:
    label: str
    bin_edges: tuple[float, ...]  # MW, len = len(counts) + 1
    counts: tuple[int, ...]
    peak_demand_mw: float
    max_output_mw: float

    @property
    def headroom_mw(self) -> float:
        return self.max_output_mw - self.peak_demand_mw

    @property
    def balanced(self) -> bool:
        return self.headroom_mw == 0.0


def _in_period(record: OutageRecord, ranges: Sequence[DateRange]) -> bool:
    day = record.timestamp.date()
    return any(start <= day <= end for start, end in ranges)


def average_outages(
    outages: Iterable[OutageRecord],
    period: DateRange | Sequence[DateRange],
    label: str = "",
) -> PeriodOutageStat:
    """Mean outage capacity over all records in the period, in GW."""
    ranges = _as_ranges(period)
    values = [r.outage_mw for r in outages if _in_period(r, ranges)]
    start = min(r[0] for r in ranges)
    end = max(r[1] for r in ranges)
    if not values:
        raise ValueError(
            f"no outage records between {start.isoformat()} and {end.isoformat()}"
        )
    return PeriodOutageStat(
        label=label or f"{start.isoformat()}..{end.isoformat()}",
        start=start,
        end=end,
        mean_outage_gw=sum(values) / len(values) / MW_PER_GW,
        n_records=len(values),
    )


def incremental_maintenance_delta(shoulder_mean_gw: float, winter_mean_gw: float) -> float:
    """Extra outage capacity attributable to shoulder-season maintenance."""
    if shoulder_mean_gw < 0 or winter_mean_gw < 0:
        raise ValueError("period means must be >= 0")
    return shoulder_mean_gw - winter_mean_gw


def unmet_demand_fraction(
    hourly_demand_mw: Sequence[float], max_output_mw: float, extra_outage_mw: float
) -> float:
    """Percent of hours whose demand exceeds max output less extra outages.

    Supply and demand are treated as unmatched populations: the count is a
    plain exceedance frequency, not an hour-by-hour dispatch balance.
    """
    demand = list(hourly_demand_mw)
    if not demand:
        raise ValueError("empty demand series")
    if extra_outage_mw < 0:
        raise ValueError("extra_outage_mw must be >= 0")
    if max_output_mw < extra_outage_mw:
        raise ValueError("max_output_mw must be >= extra_outage_mw")
    threshold = max_output_mw - extra_outage_mw
    exceed = sum(1 for d in demand if d > threshold)
    return 100.0 * exceed / len(demand)


def generation_histogram(
    outages: Iterable[OutageRecord],
    period: DateRange | Sequence[DateRange],
    bin_width_mw: float,
    peak_demand_mw: float,
    label: str = "",
) -> GenerationHistogram:
    """Histogram of telemetered output over a period, with a demand marker.

    Reports the period's maximum output and the headroom above the given
    peak demand; zero headroom flags the period as balanced.
    """
    if bin_width_mw <= 0:
        raise ValueError("bin_width_mw must be > 0")
    ranges = _as_ranges(period)
    values = [
        r.telemetered_output_mw
        for r in outages
        if _in_period(r, ranges) and r.telemetered_output_mw is not None
    ]
    if not values:
        start = min(r[0] for r in ranges)
        end = max(r[1] for r in ranges)
        raise ValueError(
            f"no telemetered output between {start.isoformat()} and {end.isoformat()}"
        )
    lo = math.floor(min(values) / bin_width_mw) * bin_width_mw
    n_bins = max(1, math.ceil((max(values) - lo) / bin_width_mw))
    if lo + n_bins * bin_width_mw <= max(values):  # top edge must cover the max
        n_bins += 1
    edges = [lo + i * bin_width_mw for i in range(n_bins + 1)]
    counts, _ = np.histogram(values, bins=edges)
    start = min(r[0] for r in ranges)
    end = max(r[1] for r in ranges)
    return GenerationHistogram(
        label=label or f"{start.isoformat()}..{end.isoformat()}",
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        peak_demand_mw=peak_demand_mw,
        max_output_mw=float(max(values)),
    )


def format_gw(value_gw: float) -> str:
    """Format a GW figure with 3 significant digits (24.0, 8.64, 10.3)."""
    if value_gw == 0:
        return "0.00"
    ndigits = 2 - math.floor(math.log10(abs(value_gw)))
    return f"{round(value_gw, ndigits):.{max(ndigits, 0)}f}"
