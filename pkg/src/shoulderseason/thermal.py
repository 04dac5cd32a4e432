"""Regional temperature processing and the demand-temperature relationship.

Covers gridded 2 m temperature handling (CSV long format or binary raster
with a JSON sidecar), population weighting with 5-year epoch snapshots,
the cubic fit of daily peak demand against daily mean temperature, the
demand-minimizing reference temperature derived from that fit, degree
days, and spatial temperature variability.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import IO, Iterable

import numpy as np

GRID_HEADER = "lat,lon,date,t2m_c"
POPULATION_HEADER = "lat,lon,epoch,persons"
MASK_HEADER = "lat,lon,in_region"


@dataclass
class TemperatureGrid:
    """Co-registered lat/lon raster of 2 m temperature in degrees C.

    values has shape (n_times, n_lats, n_lons). The time axis holds dates
    for daily grids or datetimes for hourly grids. mask marks the cells
    belonging to the analysis region; None means all cells are in.
    """

    lats: np.ndarray
    lons: np.ndarray
    times: list
    values: np.ndarray
    mask: np.ndarray | None = None

    @property
    def is_hourly(self) -> bool:
        return bool(self.times) and isinstance(self.times[0], datetime)


@dataclass
class PopulationGrid:
    """Per-cell population counts on the same axes as a TemperatureGrid."""

    lats: np.ndarray
    lons: np.ndarray
    epochs: list[int]
    weights: np.ndarray  # (n_epochs, n_lats, n_lons)


@dataclass
class RegionMask:
    lats: np.ndarray
    lons: np.ndarray
    mask: np.ndarray  # bool (n_lats, n_lons)


@dataclass(frozen=True)
class DailyRegionTemp:
    day: date
    t_avg_c: float


@dataclass(frozen=True)
class CubicDemandFit:
    """Coefficients of D = a1*T^3 + a2*T^2 + a3*T + a4 for one year.

    fit_range is the observed temperature span of the data the fit was
    made on; the reference temperature must fall inside it.
    """

    year: int | None
    a1: float
    a2: float
    a3: float
    a4: float
    fit_range: tuple[float, float]
    t0: float | None = None

    def demand(self, t: float) -> float:
        return ((self.a1 * t + self.a2) * t + self.a3) * t + self.a4


@dataclass(frozen=True)
class DegreeDayValue:
    day: date
    dd_c: float


# -- grid and mask file I/O --------------------------------------------------


def _axis(values: Iterable[float]) -> np.ndarray:
    return np.array(sorted(set(values)), dtype=float)


def _parse_time(text: str, lineno: int):
    try:
        if "T" in text or " " in text or ":" in text:
            return datetime.fromisoformat(text)
        return date.fromisoformat(text)
    except ValueError:
        raise ValueError(f"line {lineno}: bad date {text!r}") from None


def read_grid_csv(source: IO[str] | Iterable[str]) -> TemperatureGrid:
    """Read a long-format `lat,lon,date,t2m_c` grid file.

    Missing (time, cell) combinations become NaN; duplicates are an error.
    The date column holds either calendar dates (daily grid) or ISO
    datetimes (hourly grid), never a mixture.
    """
    from .ingest import _parse_float, _split_rows

    entries: list[tuple[object, float, float, float]] = []
    for lineno, (lat_s, lon_s, time_s, val_s) in _split_rows(source, GRID_HEADER):
        lat = _parse_float(lat_s, lineno, "lat")
        lon = _parse_float(lon_s, lineno, "lon")
        t = _parse_time(time_s, lineno)
        val = _parse_float(val_s, lineno, "t2m_c")
        entries.append((t, lat, lon, val))
    if not entries:
        raise ValueError("grid file has no data rows")
    kinds = {isinstance(e[0], datetime) for e in entries}
    if len(kinds) > 1:
        raise ValueError("grid file mixes daily and hourly rows")

    lats = _axis(e[1] for e in entries)
    lons = _axis(e[2] for e in entries)
    times = sorted({e[0] for e in entries})
    t_index = {t: i for i, t in enumerate(times)}
    lat_index = {v: i for i, v in enumerate(lats)}
    lon_index = {v: i for i, v in enumerate(lons)}

    values = np.full((len(times), len(lats), len(lons)), np.nan)
    for t, lat, lon, val in entries:
        i, j, k = t_index[t], lat_index[lat], lon_index[lon]
        if not np.isnan(values[i, j, k]):
            raise ValueError(f"duplicate grid entry for ({lat}, {lon}, {t})")
        values[i, j, k] = val
    return TemperatureGrid(lats, lons, times, values)


def write_grid_csv(grid: TemperatureGrid, stream: IO[str]) -> None:
    stream.write(GRID_HEADER + "\n")
    for i, t in enumerate(grid.times):
        t_s = t.isoformat()
        for j, lat in enumerate(grid.lats):
            for k, lon in enumerate(grid.lons):
                v = grid.values[i, j, k]
                if np.isnan(v):
                    continue
                stream.write(f"{float(lat)!r},{float(lon)!r},{t_s},{float(v)!r}\n")


def save_grid_raster(grid: TemperatureGrid, path: Path | str) -> None:
    """Write values as .npy plus a JSON sidecar declaring the axes."""
    path = Path(path)
    np.save(path, grid.values)
    sidecar = {
        "lats": [float(v) for v in grid.lats],
        "lons": [float(v) for v in grid.lons],
        "times": [t.isoformat() for t in grid.times],
        "hourly": grid.is_hourly,
    }
    path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=1) + "\n", encoding="utf-8"
    )


def load_grid_raster(path: Path | str) -> TemperatureGrid:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    parse = datetime.fromisoformat if sidecar["hourly"] else date.fromisoformat
    times = [parse(t) for t in sidecar["times"]]
    values = np.load(path)
    lats = np.array(sidecar["lats"], dtype=float)
    lons = np.array(sidecar["lons"], dtype=float)
    if values.shape != (len(times), len(lats), len(lons)):
        raise ValueError(
            f"raster shape {values.shape} does not match sidecar axes "
            f"({len(times)}, {len(lats)}, {len(lons)})"
        )
    return TemperatureGrid(lats, lons, times, values)


def load_temperature_grid(path: Path | str) -> TemperatureGrid:
    """Load a grid from either format, dispatching on the file suffix."""
    path = Path(path)
    if path.suffix == ".npy":
        return load_grid_raster(path)
    with open(path, encoding="utf-8") as fh:
        return read_grid_csv(fh)


def read_population_csv(source: IO[str] | Iterable[str]) -> PopulationGrid:
    from .ingest import _parse_float, _split_rows

    entries = []
    for lineno, (lat_s, lon_s, epoch_s, persons_s) in _split_rows(
        source, POPULATION_HEADER
    ):
        lat = _parse_float(lat_s, lineno, "lat")
        lon = _parse_float(lon_s, lineno, "lon")
        try:
            epoch = int(epoch_s)
        except ValueError:
            raise ValueError(f"line {lineno}: bad epoch {epoch_s!r}") from None
        persons = _parse_float(persons_s, lineno, "persons")
        if persons < 0:
            raise ValueError(f"line {lineno}: negative persons value {persons_s!r}")
        entries.append((epoch, lat, lon, persons))
    if not entries:
        raise ValueError("population file has no data rows")
    lats = _axis(e[1] for e in entries)
    lons = _axis(e[2] for e in entries)
    epochs = sorted({e[0] for e in entries})
    weights = np.zeros((len(epochs), len(lats), len(lons)))
    e_index = {v: i for i, v in enumerate(epochs)}
    lat_index = {v: i for i, v in enumerate(lats)}
    lon_index = {v: i for i, v in enumerate(lons)}
    for epoch, lat, lon, persons in entries:
        weights[e_index[epoch], lat_index[lat], lon_index[lon]] = persons
    return PopulationGrid(lats, lons, epochs, weights)


def read_mask_csv(source: IO[str] | Iterable[str]) -> RegionMask:
    from .ingest import _parse_float, _split_rows

    entries = []
    for lineno, (lat_s, lon_s, flag_s) in _split_rows(source, MASK_HEADER):
        lat = _parse_float(lat_s, lineno, "lat")
        lon = _parse_float(lon_s, lineno, "lon")
        if flag_s not in ("0", "1"):
            raise ValueError(f"line {lineno}: in_region must be 0 or 1, got {flag_s!r}")
        entries.append((lat, lon, flag_s == "1"))
    if not entries:
        raise ValueError("mask file has no data rows")
    lats = _axis(e[0] for e in entries)
    lons = _axis(e[1] for e in entries)
    mask = np.zeros((len(lats), len(lons)), dtype=bool)
    lat_index = {v: i for i, v in enumerate(lats)}
    lon_index = {v: i for i, v in enumerate(lons)}
    for lat, lon, flag in entries:
        mask[lat_index[lat], lon_index[lon]] = flag
    return RegionMask(lats, lons, mask)


def attach_mask(grid: TemperatureGrid, mask: RegionMask) -> TemperatureGrid:
    if not np.array_equal(grid.lats, mask.lats) or not np.array_equal(
        grid.lons, mask.lons
    ):
        raise ValueError("region mask is not co-registered with the temperature grid")
    return replace(grid, mask=mask.mask.copy())


# -- regional temperature series ---------------------------------------------


def daily_cell_means(grid: TemperatureGrid) -> tuple[list[date], np.ndarray]:
    """Collapse an hourly grid to per-cell daily means; pass daily through."""
    if not grid.is_hourly:
        return list(grid.times), grid.values
    days: list[date] = []
    chunks: list[np.ndarray] = []
    start = 0
    for i in range(1, len(grid.times) + 1):
        if i == len(grid.times) or grid.times[i].date() != grid.times[start].date():
            days.append(grid.times[start].date())
            chunks.append(grid.values[start:i].mean(axis=0))
            start = i
    return days, np.stack(chunks)


def _epoch_row(pop: PopulationGrid, year: int) -> np.ndarray:
    # Piecewise-constant, nearest-previous epoch; years before the first
    # epoch fall back to it.
    eligible = [e for e in pop.epochs if e <= year]
    epoch = max(eligible) if eligible else min(pop.epochs)
    return pop.weights[pop.epochs.index(epoch)]


def population_weighted_daily_temp(
    grid: TemperatureGrid,
    pop: PopulationGrid | None = None,
    start: date | None = None,
    end: date | None = None,
) -> list[DailyRegionTemp]:
    """Reduce a gridded temperature field to one regional value per day.

    Each day's value is the weighted mean over masked-in cells, with
    weights taken from the population epoch in force on that date. With
    pop=None the mean is unweighted. Hourly grids are first averaged to
    daily values per cell. Requesting a date range that the grid does not
    fully cover is an error, as is a zero total weight inside the mask.
    """
    days, values = daily_cell_means(grid)
    mask = grid.mask if grid.mask is not None else np.ones(values.shape[1:], dtype=bool)
    if not mask.any():
        raise ValueError("region mask selects no cells")
    if pop is not None and (
        not np.array_equal(grid.lats, pop.lats) or not np.array_equal(grid.lons, pop.lons)
    ):
        raise ValueError("population grid is not co-registered with the temperature grid")

    available = {d: i for i, d in enumerate(days)}
    if start is None and end is None:
        selected = days
    else:
        lo = start or days[0]
        hi = end or days[-1]
        selected = []
        d = lo
        while d <= hi:
            if d not in available:
                raise ValueError(f"missing date in grid: {d.isoformat()}")
            selected.append(d)
            d += timedelta(days=1)

    out: list[DailyRegionTemp] = []
    for d in selected:
        cells = values[available[d]][mask]
        if np.isnan(cells).any():
            raise ValueError(f"missing temperature inside region on {d.isoformat()}")
        if pop is None:
            t_avg = float(cells.mean())
        else:
            w = _epoch_row(pop, d.year)[mask]
            total = float(w.sum())
            if total <= 0:
                raise ValueError(
                    f"population weights sum to zero inside region for {d.year}"
                )
            t_avg = float((w * cells).sum() / total)
        out.append(DailyRegionTemp(d, t_avg))
    return out


def spatial_temp_stddev(
    grid: TemperatureGrid, start: date | None = None, end: date | None = None
) -> float:
    """Mean over days of the across-cell standard deviation of daily means.

    Uses the unweighted population standard deviation over masked-in
    cells. A single-cell mask returns 0 with a warning.
    """
    days, values = daily_cell_means(grid)
    mask = grid.mask if grid.mask is not None else np.ones(values.shape[1:], dtype=bool)
    n_cells = int(mask.sum())
    if n_cells == 0:
        raise ValueError("region mask selects no cells")
    if n_cells == 1:
        warnings.warn(
            "single-cell region mask: spatial standard deviation is 0 by convention"
        )
        return 0.0
    stds = []
    for i, d in enumerate(days):
        if (start is not None and d < start) or (end is not None and d > end):
            continue
        cells = values[i][mask]
        if np.isnan(cells).any():
            raise ValueError(f"missing temperature inside region on {d.isoformat()}")
        stds.append(float(cells.std()))
    if not stds:
        raise ValueError("no grid days inside the requested range")
    return float(np.mean(stds))


# -- demand-temperature cubic and reference temperature ----------------------


def fit_demand_temperature_cubic(
    pairs: Iterable[tuple[float, float]], year: int | None = None
) -> CubicDemandFit:
    """Least-squares cubic of peak demand (MW) against daily mean temp (C).

    The abscissa is rescaled internally before solving (raw normal
    equations on T^3 scales are badly conditioned) and the coefficients
    are converted back to the plain power basis for reporting.
    """
    pts = list(pairs)
    t = np.array([p[0] for p in pts], dtype=float)
    d = np.array([p[1] for p in pts], dtype=float)
    if np.unique(t).size < 4:
        raise ValueError(
            f"cubic fit needs at least 4 distinct temperatures, got {np.unique(t).size}"
        )
    poly = np.polynomial.Polynomial.fit(t, d, 3).convert()
    coef = np.zeros(4)
    coef[: poly.coef.size] = poly.coef  # ascending powers
    return CubicDemandFit(
        year=year,
        a1=float(coef[3]),
        a2=float(coef[2]),
        a3=float(coef[1]),
        a4=float(coef[0]),
        fit_range=(float(t.min()), float(t.max())),
    )


def reference_temperature(fit: CubicDemandFit) -> float:
    """Temperature of the fitted demand minimum inside the fit range.

    Solves 3*a1*T^2 + 2*a2*T + a3 = 0 and keeps the root with positive
    curvature (6*a1*T + 2*a2 > 0). Degenerates to the parabola vertex when
    a1 = 0. Raises if no interior local minimum exists in range.
    """
    a1, a2, a3 = fit.a1, fit.a2, fit.a3
    lo, hi = fit.fit_range
    candidates: list[float] = []
    if a1 == 0:
        if a2 <= 0:
            raise ValueError("demand fit has no interior minimum (a1=0, a2<=0)")
        candidates.append(-a3 / (2 * a2))
    else:
        a, b, c = 3 * a1, 2 * a2, a3
        disc = b * b - 4 * a * c
        if disc <= 0:
            raise ValueError("demand fit has no interior minimum (no stationary points)")
        # Numerically stable quadratic roots; a3 can be tiny relative to a2.
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b if b != 0 else 1.0))
        for root in (q / a, c / q if q != 0 else None):
            if root is not None and 6 * a1 * root + 2 * a2 > 0:
                candidates.append(root)
    in_range = [r for r in candidates if lo <= r <= hi]
    if not in_range:
        raise ValueError(
            f"demand minimum at {candidates} lies outside the fit range ({lo}, {hi})"
            if candidates
            else "demand fit has no minimum"
        )
    return in_range[0]


def global_t0(t0_values: Iterable[float]) -> float:
    """Arithmetic mean of the yearly reference temperatures."""
    values = list(t0_values)
    if not values:
        raise ValueError("no yearly reference temperatures to average")
    return sum(values) / len(values)


def degree_days(t_avg: float, t0: float) -> float:
    """Absolute deviation of the daily mean temperature from t0."""
    if t_avg >= t0:
        return t_avg - t0
    return t0 - t_avg


def degree_day_series(
    temps: Iterable[DailyRegionTemp], t0: float
) -> list[DegreeDayValue]:
    return [DegreeDayValue(t.day, degree_days(t.t_avg_c, t0)) for t in temps]


def annual_means(temps: Iterable[DailyRegionTemp]) -> dict[int, float]:
    """Per-year mean of a daily regional temperature series."""
    buckets: dict[int, list[float]] = {}
    for t in temps:
        buckets.setdefault(t.day.year, []).append(t.t_avg_c)
    return {year: sum(v) / len(v) for year, v in sorted(buckets.items())}
