"""Parsers, validators, and daily aggregation for grid-operator data files.

All series use region-local naive timestamps and canonical units of MW,
MWh, and degrees C. Parsers are strict: a malformed or out-of-order row
fails the whole file with the offending line number in the message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime
from typing import IO, Iterable, Iterator, Sequence

LOAD_HEADER = "date,hour,load_mw"
FUEL_MIX_HEADER = "timestamp,wind_mw,solar_mw,hydro_mw,other_mw"
OUTAGE_HEADER = "timestamp,outage_mw,telemetered_output_mw"
DAILY_HEADER = "date,total_energy_mwh,peak_demand_mw,hours_present"

# Days with fewer hours than this are flagged as partial and excluded
# from window searches downstream.
DEFAULT_MIN_HOURS = 20


@dataclass(frozen=True)
class HourlyLoadRecord:
    timestamp: datetime
    load_mw: float


@dataclass(frozen=True)
class DailyLoadSummary:
    day: date
    total_energy_mwh: float
    peak_demand_mw: float
    hours_present: int


@dataclass(frozen=True)
class FuelMixRecord:
    timestamp: datetime
    wind_mw: float
    solar_mw: float
    hydro_mw: float
    other_mw: float

    @property
    def non_thermal_mw(self) -> float:
        return self.wind_mw + self.solar_mw + self.hydro_mw


@dataclass(frozen=True)
class OutageRecord:
    timestamp: datetime
    outage_mw: float
    telemetered_output_mw: float | None = None


def _lines(source: IO[str] | Iterable[str]) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if line:
            yield lineno, line


def _split_rows(
    source: IO[str] | Iterable[str], header: str
) -> Iterator[tuple[int, list[str]]]:
    """Yield (lineno, fields) for data rows after validating the header."""
    n_fields = header.count(",") + 1
    it = _lines(source)
    try:
        lineno, first = next(it)
    except StopIteration:
        raise ValueError(f"empty file: expected header {header!r}") from None
    if first.strip() != header:
        raise ValueError(f"line {lineno}: expected header {header!r}, got {first!r}")
    for lineno, line in it:
        fields = line.split(",")
        if len(fields) != n_fields:
            raise ValueError(
                f"line {lineno}: expected {n_fields} fields, got {len(fields)}"
            )
        yield lineno, [f.strip() for f in fields]


def _parse_float(text: str, lineno: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"line {lineno}: bad {name} value {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"line {lineno}: non-finite {name} value {text!r}")
    return value


def _parse_date(text: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ValueError(f"line {lineno}: bad date {text!r}") from None


def _parse_timestamp(text: str, lineno: int) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"line {lineno}: bad timestamp {text!r}") from None


def _check_increasing(ts: datetime, prev: datetime | None, lineno: int) -> None:
    if prev is None:
        return
    if ts == prev:
        raise ValueError(f"line {lineno}: duplicate timestamp {ts.isoformat()}")
    if ts < prev:
        raise ValueError(
            f"line {lineno}: timestamps not increasing "
            f"({ts.isoformat()} after {prev.isoformat()})"
        )


def parse_hourly_load(source: IO[str] | Iterable[str]) -> list[HourlyLoadRecord]:
    """Parse a `date,hour,load_mw` stream into sorted hourly records.

    Timestamps must be strictly increasing; loads must be finite and
    non-negative. Raises ValueError naming the offending line otherwise.
    """
    records: list[HourlyLoadRecord] = []
    prev: datetime | None = None
    for lineno, (day_s, hour_s, load_s) in _split_rows(source, LOAD_HEADER):
        day = _parse_date(day_s, lineno)
        try:
            hour = int(hour_s)
        except ValueError:
            raise ValueError(f"line {lineno}: bad hour {hour_s!r}") from None
        if not 0 <= hour <= 23:
            raise ValueError(f"line {lineno}: hour {hour} out of range 0-23")
        load = _parse_float(load_s, lineno, "load_mw")
        if load < 0:
            raise ValueError(f"line {lineno}: negative load {load_s!r}")
        ts = datetime(day.year, day.month, day.day, hour)
        _check_increasing(ts, prev, lineno)
        records.append(HourlyLoadRecord(ts, load))
        prev = ts
    return records


def parse_fuel_mix(source: IO[str] | Iterable[str]) -> list[FuelMixRecord]:
    """Parse a fuel-mix stream (15-minute ISO timestamps, MW per source)."""
    records: list[FuelMixRecord] = []
    prev: datetime | None = None
    for lineno, fields in _split_rows(source, FUEL_MIX_HEADER):
        ts = _parse_timestamp(fields[0], lineno)
        if ts.minute % 15 or ts.second or ts.microsecond:
            raise ValueError(
                f"line {lineno}: timestamp {fields[0]!r} not on a 15-minute boundary"
            )
        values = []
        for name, text in zip(("wind_mw", "solar_mw", "hydro_mw", "other_mw"), fields[1:]):
            value = _parse_float(text, lineno, name)
            if value < 0:
                raise ValueError(f"line {lineno}: negative {name} value {text!r}")
            values.append(value)
        _check_increasing(ts, prev, lineno)
        records.append(FuelMixRecord(ts, *values))
        prev = ts
    return records


def parse_outages(source: IO[str] | Iterable[str]) -> list[OutageRecord]:
    """Parse a generation-outage stream at 15-minute resolution."""
    records: list[OutageRecord] = []
    prev: datetime | None = None
    for lineno, (ts_s, outage_s, telem_s) in _split_rows(source, OUTAGE_HEADER):
        ts = _parse_timestamp(ts_s, lineno)
        if ts.minute % 15 or ts.second or ts.microsecond:
            raise ValueError(
                f"line {lineno}: timestamp {ts_s!r} not on a 15-minute boundary"
            )
        outage = _parse_float(outage_s, lineno, "outage_mw")
        if outage < 0:
            raise ValueError(f"line {lineno}: negative outage_mw value {outage_s!r}")
        telem: float | None = None
        if telem_s:
            telem = _parse_float(telem_s, lineno, "telemetered_output_mw")
            if telem < 0:
                raise ValueError(
                    f"line {lineno}: negative telemetered_output_mw value {telem_s!r}"
                )
        _check_increasing(ts, prev, lineno)
        records.append(OutageRecord(ts, outage, telem))
        prev = ts
    return records


def aggregate_daily(hourly: Sequence[HourlyLoadRecord]) -> list[DailyLoadSummary]:
    """Collapse sorted hourly records into per-day energy/peak summaries.

    total_energy_mwh is the plain sum of hourly MW values (1-hour steps);
    peak_demand_mw is the maximum hourly value. Partial days are kept and
    reported through hours_present; exclusion policy is the caller's.
    """
    summaries: list[DailyLoadSummary] = []
    current: date | None = None
    total = 0.0
    peak = 0.0
    hours = 0

    def flush() -> None:
        if current is not None:
            summaries.append(DailyLoadSummary(current, total, peak, hours))

    for rec in hourly:
        day = rec.timestamp.date()
        if day != current:
            flush()
            current, total, peak, hours = day, 0.0, 0.0, 0
        total += rec.load_mw
        peak = max(peak, rec.load_mw)
        hours += 1
    flush()
    return summaries


def net_non_thermal(
    hourly: Sequence[HourlyLoadRecord], mix: Sequence[FuelMixRecord]
) -> list[HourlyLoadRecord]:
    """Remove wind/solar/hydro output from each hourly load, floored at 0.

    Sub-hourly mix samples are averaged (not summed) to an hourly MW rate.
    Every load hour must be covered by at least one mix sample.
    """
    by_hour: dict[datetime, list[float]] = {}
    for rec in mix:
        key = rec.timestamp.replace(minute=0)
        by_hour.setdefault(key, []).append(rec.non_thermal_mw)

    netted: list[HourlyLoadRecord] = []
    for rec in hourly:
        samples = by_hour.get(rec.timestamp)
        if not samples:
            raise ValueError(
                f"missing fuel-mix coverage for load hour {rec.timestamp.isoformat()}"
            )
        non_thermal = sum(samples) / len(samples)
        netted.append(HourlyLoadRecord(rec.timestamp, max(rec.load_mw - non_thermal, 0.0)))
    return netted


# Canonical serialization. Floats are written with repr so a write/parse
# round trip reproduces the series bit for bit.


def _fmt(value: float) -> str:
    return repr(float(value))


def write_hourly_load(records: Iterable[HourlyLoadRecord], stream: IO[str]) -> None:
    stream.write(LOAD_HEADER + "\n")
    for rec in records:
        ts = rec.timestamp
        stream.write(f"{ts.date().isoformat()},{ts.hour},{_fmt(rec.load_mw)}\n")


def write_fuel_mix(records: Iterable[FuelMixRecord], stream: IO[str]) -> None:
    stream.write(FUEL_MIX_HEADER + "\n")
    for rec in records:
        stream.write(
            ",".join(
                [
                    rec.timestamp.isoformat(),
                    _fmt(rec.wind_mw),
                    _fmt(rec.solar_mw),
                    _fmt(rec.hydro_mw),
                    _fmt(rec.other_mw),
                ]
            )
            + "\n"
        )


def write_outages(records: Iterable[OutageRecord], stream: IO[str]) -> None:
    stream.write(OUTAGE_HEADER + "\n")
    for rec in records:
        telem = "" if rec.telemetered_output_mw is None else _fmt(rec.telemetered_output_mw)
        stream.write(f"{rec.timestamp.isoformat()},{_fmt(rec.outage_mw)},{telem}\n")


def write_daily_summaries(summaries: Iterable[DailyLoadSummary], stream: IO[str]) -> None:
    stream.write(DAILY_HEADER + "\n")
    for s in summaries:
        stream.write(
            f"{s.day.isoformat()},{_fmt(s.total_energy_mwh)},"
            f"{_fmt(s.peak_demand_mw)},{s.hours_present}\n"
        )


def read_daily_summaries(source: IO[str] | Iterable[str]) -> list[DailyLoadSummary]:
    summaries: list[DailyLoadSummary] = []
    for lineno, (day_s, total_s, peak_s, hours_s) in _split_rows(source, DAILY_HEADER):
        day = _parse_date(day_s, lineno)
        total = _parse_float(total_s, lineno, "total_energy_mwh")
        peak = _parse_float(peak_s, lineno, "peak_demand_mw")
        try:
            hours = int(hours_s)
        except ValueError:
            raise ValueError(f"line {lineno}: bad hours_present {hours_s!r}") from None
        if not 0 <= hours <= 24:
            raise ValueError(f"line {lineno}: hours_present {hours} out of range 0-24")
        summaries.append(DailyLoadSummary(day, total, peak, hours))
    return summaries
