"""Deterministic synthetic input bundle for end-to-end runs and tests.

Builds a small self-consistent world on a 3x3 grid: a warming seasonal
temperature field, hourly load driven by a cubic response to daily mean
temperature, 15-minute fuel-mix and outage feeds, and a monthly climate
ensemble with a deliberate affine bias. Identical seeds produce byte-
identical files, so pipeline output can be compared run to run.
"""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np

LOAD_YEARS = range(2015, 2023)
TEMP_YEARS = range(1995, 2023)
MIX_YEARS = range(2019, 2023)
OUTAGE_YEARS = range(2020, 2023)
ENSEMBLE_YEARS = range(2015, 2071)
ENSEMBLE_MEMBERS = ("m01", "m02", "m03", "m04", "m05")

LATS = (30.0, 30.25, 30.5)
LONS = (-98.0, -97.75, -97.5)
# NW 2x2 block is the analysis region.
MASK = ((1, 1, 0), (1, 1, 0), (0, 0, 0))
CELL_OFFSETS = ((-1.0, -0.5, 0.2), (-0.25, 0.25, 0.6), (0.4, 0.8, 1.2))

BASE_TEMP_C = 14.5
WARMING_C_PER_YEAR = 0.05
SEASONAL_AMPLITUDE_C = 11.0
HOTTEST_DOY = 205.0

FILES = {
    "load": "fixture_load.csv",
    "fuel_mix": "fixture_fuel_mix.csv",
    "outages": "fixture_outages.csv",
    "grid": "fixture_temperature.csv",
    "population": "fixture_population.csv",
    "mask": "fixture_mask.csv",
    "ensemble": "fixture_ensemble.csv",
    "config": "fixture.conf",
}


def _days(year: int) -> list[date]:
    d = date(year, 1, 1)
    out = []
    while d.year == year:
        out.append(d)
        d += timedelta(days=1)
    return out


def _smooth(noise: np.ndarray, width: int = 7) -> np.ndarray:
    kernel = np.ones(width) / width
    return np.convolve(noise, kernel, mode="same")


def _regional_temp(year: int, rng: np.random.Generator) -> np.ndarray:
    days = _days(year)
    doy = np.arange(1, len(days) + 1, dtype=float)
    base = BASE_TEMP_C + WARMING_C_PER_YEAR * (year - LOAD_YEARS.start)
    seasonal = SEASONAL_AMPLITUDE_C * np.cos(2 * np.pi * (doy - HOTTEST_DOY) / 365.25)
    weather = _smooth(rng.normal(0.0, 2.4, size=len(days)))
    return base + seasonal + weather


def _daily_profile() -> np.ndarray:
    hours = np.arange(24, dtype=float)
    return 0.86 + 0.28 * np.exp(-(((hours - 16.5) / 5.0) ** 2))


def generate_fixture(out_dir: Path | str, seed: int = 42) -> list[Path]:
    """Write the full synthetic input set plus a config file; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    written: list[Path] = []

    regional: dict[int, np.ndarray] = {
        year: _regional_temp(year, rng) for year in TEMP_YEARS
    }

    # Temperature grid: daily per-cell values around the regional curve.
    grid_lines = ["lat,lon,date,t2m_c"]
    for year in TEMP_YEARS:
        days = _days(year)
        cell_noise = rng.normal(0.0, 0.3, size=(len(days), len(LATS), len(LONS)))
        for i, lat in enumerate(LATS):
            for j, lon in enumerate(LONS):
                series = regional[year] + CELL_OFFSETS[i][j] + cell_noise[:, i, j]
                for d, v in zip(days, series):
                    grid_lines.append(f"{lat},{lon},{d.isoformat()},{v:.4f}")
    written.append(_write(out / FILES["grid"], grid_lines))

    # Population: epochs 2000-2020, region cells dominate, mild growth.
    base_pop = ((900.0, 400.0, 10.0), (600.0, 300.0, 8.0), (5.0, 4.0, 2.0))
    pop_lines = ["lat,lon,epoch,persons"]
    for k, epoch in enumerate((2000, 2005, 2010, 2015, 2020)):
        growth = 1.0 + 0.06 * k
        for i, lat in enumerate(LATS):
            for j, lon in enumerate(LONS):
                pop_lines.append(f"{lat},{lon},{epoch},{base_pop[i][j] * growth:.1f}")
    written.append(_write(out / FILES["population"], pop_lines))

    mask_lines = ["lat,lon,in_region"]
    for i, lat in enumerate(LATS):
        for j, lon in enumerate(LONS):
            mask_lines.append(f"{lat},{lon},{MASK[i][j]}")
    written.append(_write(out / FILES["mask"], mask_lines))

    # Hourly load: cubic response to the daily regional temperature plus a
    # diurnal profile; mild year-on-year growth.
    profile = _daily_profile()
    load_lines = ["date,hour,load_mw"]
    demand_day_by_date: dict[date, float] = {}
    for year in LOAD_YEARS:
        days = _days(year)
        temp = regional[year]
        growth = 1500.0 * (year - LOAD_YEARS.start)
        x = temp - BASE_TEMP_C
        demand_day = 40000.0 + growth + 55.0 * x**2 + 1.2 * x**3
        hour_noise = rng.normal(0.0, 250.0, size=(len(days), 24))
        for d, base_mw, noise in zip(days, demand_day, hour_noise):
            demand_day_by_date[d] = float(base_mw)
            for h in range(24):
                mw = max(base_mw * profile[h] + noise[h], 0.0)
                load_lines.append(f"{d.isoformat()},{h},{mw:.3f}")
    written.append(_write(out / FILES["load"], load_lines))

    # Fuel mix at 15 minutes for the last two load years.
    mix_lines = ["timestamp,wind_mw,solar_mw,hydro_mw,other_mw"]
    for year in MIX_YEARS:
        days = _days(year)
        doy = np.arange(1, len(days) + 1, dtype=float)
        wind_day = 5500.0 + 2500.0 * np.sin(2 * np.pi * (doy - 90.0) / 365.25)
        wind_noise = _smooth(rng.normal(0.0, 900.0, size=len(days) * 96), width=13)
        idx = 0
        for d, wbase in zip(days, wind_day):
            for h in range(24):
                solar = max(0.0, 7000.0 * np.sin(np.pi * (h + 0.5 - 6.5) / 13.0)) if 6 <= h <= 19 else 0.0
                for q in (0, 15, 30, 45):
                    wind = max(wbase + wind_noise[idx], 0.0)
                    idx += 1
                    mix_lines.append(
                        f"{d.isoformat()}T{h:02d}:{q:02d},{wind:.2f},{solar:.2f},250.00,150.00"
                    )
    written.append(_write(out / FILES["fuel_mix"], mix_lines))

    # Outages at 15 minutes: maintenance bumps in spring and fall, quiet in
    # winter and high summer; telemetered output tracks load with margin.
    outage_lines = ["timestamp,outage_mw,telemetered_output_mw"]
    for year in OUTAGE_YEARS:
        days = _days(year)
        doy = np.arange(1, len(days) + 1, dtype=float)
        bumps = np.exp(-(((doy - 95.0) / 24.0) ** 2)) + np.exp(
            -(((doy - 300.0) / 24.0) ** 2)
        )
        outage_day = 7000.0 + 15000.0 * bumps
        noise = _smooth(rng.normal(0.0, 700.0, size=len(days) * 96), width=9)
        telem_noise = rng.normal(0.0, 200.0, size=len(days) * 96)
        idx = 0
        for d, obase in zip(days, outage_day):
            demand_day = demand_day_by_date[d]
            for h in range(24):
                hour_mw = demand_day * profile[h]
                for q in (0, 15, 30, 45):
                    outage = max(obase + noise[idx], 0.0)
                    telem = max(hour_mw * 1.01 + 1500.0 + telem_noise[idx], 0.0)
                    idx += 1
                    outage_lines.append(
                        f"{d.isoformat()}T{h:02d}:{q:02d},{outage:.2f},{telem:.2f}"
                    )
    written.append(_write(out / FILES["outages"], outage_lines))

    # Monthly ensemble with a deliberate affine bias relative to the
    # observed scale: raw = (obs_like - 1.0) / 0.92.
    ens_lines = ["member,year,month,t2m_c"]
    month_shape = SEASONAL_AMPLITUDE_C * np.cos(2 * np.pi * (np.arange(1, 13) - 7.2) / 12.0)
    for member in ENSEMBLE_MEMBERS:
        for year in ENSEMBLE_YEARS:
            annual_obs_like = (
                BASE_TEMP_C + 0.7 + WARMING_C_PER_YEAR * 0.9 * (year - LOAD_YEARS.start)
            )
            raw_annual = (annual_obs_like - 1.0) / 0.92 + float(rng.normal(0.0, 0.22))
            for month in range(1, 13):
                ens_lines.append(
                    f"{member},{year},{month},{raw_annual + month_shape[month - 1]:.4f}"
                )
    written.append(_write(out / FILES["ensemble"], ens_lines))

    config_text = "\n".join(
        [
            "# synthetic fixture configuration",
            "region_label = synthetic-region",
            f"load_csv = {FILES['load']}",
            f"fuel_mix_csv = {FILES['fuel_mix']}",
            f"outage_csv = {FILES['outages']}",
            f"temperature_grid = {FILES['grid']}",
            f"population_csv = {FILES['population']}",
            f"mask_csv = {FILES['mask']}",
            f"ensemble_csv = {FILES['ensemble']}",
            "window_len = 45",
            "min_hours = 20",
            "max_missing_days = 3",
            "allow_year_wrap = true",
            "outlier_policy = none",
            "persistence = 3",
            "extra_outage_gw = 5.5",
            "adequacy_bin_gw = 1.0",
            "out_dir = out",
            "",
        ]
    )
    config_path = out / FILES["config"]
    config_path.write_text(config_text, encoding="utf-8")
    written.append(config_path)
    return written


def _write(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
