"""Time-series driver: weather ingestion, per-timestep solves, summaries.

Weather CSV format (header is mandatory and exact)::

    timestamp,wind_speed_m_s,wind_dir_deg,temp_out_c
    2024-01-01T00:00:00,3.2,105.0,23.4
    ...

Timestamps are ISO-8601 and must be strictly increasing; a non-uniform step
only triggers a warning.  Zone temperatures are fixed per run; the weather
drives wind pressures and the outdoor air column.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .assembly import BoundaryState
from .network import Network
from .solvers import (
    NonConvergenceError,
    SingularJacobianError,
    SolverConfig,
    solve,
)

__all__ = [
    "WEATHER_HEADER",
    "WeatherRecord",
    "TimestepRecord",
    "StrategySummary",
    "WeatherFormatError",
    "parse_weather",
    "serialize_weather",
    "generate_weather",
    "boundary_from_record",
    "run_simulation",
    "summarize",
    "write_timestep_csv",
]

log = logging.getLogger("airnet")

WEATHER_HEADER = ("timestamp", "wind_speed_m_s", "wind_dir_deg", "temp_out_c")


class WeatherFormatError(ValueError):
    """Raised for malformed weather files (bad header, row, or ordering)."""


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: str  # ISO-8601
    wind_speed: float  # m/s
    wind_dir_deg: float
    temp_out_c: float


@dataclass(frozen=True)
class TimestepRecord:
    """One solver outcome within a time series (or its failure)."""

    timestamp: str
    strategy: str
    picard_iters: int
    newton_iters: int
    converged_in_picard: bool
    picard_aborted: str | None
    max_residual: float
    pressures: tuple[float, ...]
    failed: str | None = None  # None | "non-convergence" | "singular-jacobian"


@dataclass(frozen=True)
class StrategySummary:
    """Aggregate iteration statistics for one strategy over a series."""

    strategy: str
    steps: int
    failures: int
    mean_newton_iters: float
    median_newton_iters: float
    max_newton_iters: int
    mean_iters_with_picard_cost: float  # Picard budget added when it ran and did not finish
    pct_converged_in_picard: float
    mean_picard_iters: float


def parse_weather(text: str) -> list[WeatherRecord]:
    """Parse and validate a weather CSV (see module docstring for format)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise WeatherFormatError("empty weather file") from None
    if tuple(h.strip() for h in header) != WEATHER_HEADER:
        raise WeatherFormatError(
            f"bad header {header!r}, expected {','.join(WEATHER_HEADER)}"
        )

    records: list[WeatherRecord] = []
    previous: datetime | None = None
    first_step: timedelta | None = None
    warned_step = False
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise WeatherFormatError(f"line {line_no}: expected 4 fields, got {len(row)}")
        stamp_text = row[0].strip()
        try:
            stamp = datetime.fromisoformat(stamp_text)
        except ValueError:
            raise WeatherFormatError(f"line {line_no}: bad timestamp '{stamp_text}'") from None
        try:
            speed, direction, temp = (float(v) for v in row[1:])
        except ValueError:
            raise WeatherFormatError(f"line {line_no}: non-numeric field in {row[1:]}") from None
        if speed < 0:
            raise WeatherFormatError(f"line {line_no}: negative wind speed {speed}")
        if previous is not None:
            if stamp <= previous:
                raise WeatherFormatError(
                    f"line {line_no}: timestamp '{stamp_text}' not after the previous row"
                )
            step = stamp - previous
            if first_step is None:
                first_step = step
            elif step != first_step and not warned_step:
                log.warning(
                    "weather file has a non-uniform timestep at line %d (%s vs %s)",
                    line_no,
                    step,
                    first_step,
                )
                warned_step = True
        previous = stamp
        records.append(WeatherRecord(stamp_text, speed, direction, temp))
    if not records:
        raise WeatherFormatError("weather file has no data rows")
    return records


def serialize_weather(records: list[WeatherRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(WEATHER_HEADER)
    for rec in records:
        writer.writerow(
            [rec.timestamp, f"{rec.wind_speed:.3f}", f"{rec.wind_dir_deg:.2f}", f"{rec.temp_out_c:.3f}"]
        )
    return out.getvalue()


def generate_weather(
    days: int = 10,
    step_minutes: int = 30,
    seed: int = 0,
    start: datetime | None = None,
) -> list[WeatherRecord]:
    """Synthetic weather series: sinusoidal diurnal temperature and a gusty,
    slowly veering wind.  Deterministic for a given seed."""
    if days < 1 or step_minutes < 1:
        raise ValueError("days and step_minutes must be >= 1")
    start = start or datetime(2024, 1, 1)
    rng = np.random.default_rng(seed)
    count = days * 24 * 60 // step_minutes
    records = []
    for i in range(count):
        stamp = start + timedelta(minutes=i * step_minutes)
        hour = stamp.hour + stamp.minute / 60.0
        temp = 24.0 + 4.0 * math.sin(2.0 * math.pi * (hour - 9.0) / 24.0)
        temp += float(rng.normal(0.0, 0.4))
        wind = 4.0 + 2.0 * math.sin(2.0 * math.pi * (hour - 12.0) / 24.0)
        wind = max(0.0, wind + float(rng.normal(0.0, 1.2)))
        direction = 110.0 + 25.0 * math.sin(2.0 * math.pi * i / (2.0 * count / days))
        direction = (direction + float(rng.normal(0.0, 12.0))) % 360.0
        records.append(
            WeatherRecord(
                timestamp=stamp.isoformat(),
                wind_speed=round(wind, 3),
                wind_dir_deg=round(direction, 2),
                temp_out_c=round(temp, 3),
            )
        )
    return records


def boundary_from_record(rec: WeatherRecord) -> BoundaryState:
    return BoundaryState(
        wind_speed=rec.wind_speed,
        wind_direction_deg=rec.wind_dir_deg,
        outdoor_temp_k=rec.temp_out_c + 273.15,
    )


def run_simulation(
    net: Network,
    weather: list[WeatherRecord],
    strategy: str,
    cfg: SolverConfig | None = None,
    warm_start: bool = True,
) -> list[TimestepRecord]:
    """Solve every timestep of a weather series with one strategy.

    With warm_start each step begins from the previous step's solution (the
    first always starts from zeros); otherwise every step starts from zeros.
    A failed step is recorded and the next one restarts from zeros; failures
    are data, not exceptions.
    """
    if not weather:
        raise ValueError("weather series is empty")
    cfg = cfg or SolverConfig()
    records: list[TimestepRecord] = []
    previous: np.ndarray | None = None
    zeros = np.zeros(len(net.zones))
    for rec in weather:
        bc = boundary_from_record(rec)
        p0 = previous if (warm_start and previous is not None) else zeros
        try:
            outcome = solve(net, bc, p0, strategy, cfg)
        except NonConvergenceError as exc:
            log.warning("%s %s: %s", strategy, rec.timestamp, exc)
            records.append(
                TimestepRecord(
                    timestamp=rec.timestamp,
                    strategy=strategy.upper(),
                    picard_iters=0,
                    newton_iters=exc.iterations,
                    converged_in_picard=False,
                    picard_aborted=None,
                    max_residual=exc.max_residual,
                    pressures=tuple(float(v) for v in exc.pressures),
                    failed="non-convergence",
                )
            )
            previous = None
            continue
        except SingularJacobianError as exc:
            log.warning("%s %s: %s", strategy, rec.timestamp, exc)
            records.append(
                TimestepRecord(
                    timestamp=rec.timestamp,
                    strategy=strategy.upper(),
                    picard_iters=0,
                    newton_iters=exc.iteration,
                    converged_in_picard=False,
                    picard_aborted=None,
                    max_residual=math.inf,
                    pressures=tuple(float(v) for v in exc.pressures),
                    failed="singular-jacobian",
                )
            )
            previous = None
            continue
        records.append(
            TimestepRecord(
                timestamp=rec.timestamp,
                strategy=outcome.strategy,
                picard_iters=outcome.picard_iters_used,
                newton_iters=outcome.newton_iters,
                converged_in_picard=outcome.converged_in_picard,
                picard_aborted=outcome.picard_aborted,
                max_residual=outcome.max_residual,
                pressures=tuple(float(v) for v in outcome.pressures),
            )
        )
        previous = outcome.pressures if warm_start else None
    return records


def summarize(records: list[TimestepRecord]) -> dict[str, StrategySummary]:
    """Aggregate per-strategy iteration statistics.

    Two accounting conventions are reported: `mean_newton_iters` counts only
    Newton linear solves, while `mean_iters_with_picard_cost` adds the Picard
    iterations spent whenever the initializer ran without converging on its
    own.  Failed steps are excluded from the iteration statistics and
    reported in `failures`.
    """
    if not records:
        raise ValueError("no records to summarize")
    by_strategy: dict[str, list[TimestepRecord]] = {}
    for rec in records:
        by_strategy.setdefault(rec.strategy, []).append(rec)

    out: dict[str, StrategySummary] = {}
    for strategy, recs in by_strategy.items():
        ok = [r for r in recs if r.failed is None]
        failures = len(recs) - len(ok)
        if ok:
            newton = np.array([r.newton_iters for r in ok], dtype=float)
            with_picard = np.array(
                [
                    r.newton_iters
                    + (r.picard_iters if (r.picard_iters > 0 and not r.converged_in_picard) else 0)
                    for r in ok
                ],
                dtype=float,
            )
            in_picard = sum(1 for r in ok if r.converged_in_picard)
            out[strategy] = StrategySummary(
                strategy=strategy,
                steps=len(recs),
                failures=failures,
                mean_newton_iters=round(float(newton.mean()), 2),
                median_newton_iters=float(np.median(newton)),
                max_newton_iters=int(newton.max()),
                mean_iters_with_picard_cost=round(float(with_picard.mean()), 2),
                pct_converged_in_picard=round(100.0 * in_picard / len(ok), 1),
                mean_picard_iters=round(float(np.mean([r.picard_iters for r in ok])), 2),
            )
        else:
            out[strategy] = StrategySummary(
                strategy=strategy,
                steps=len(recs),
                failures=failures,
                mean_newton_iters=math.nan,
                median_newton_iters=math.nan,
                max_newton_iters=0,
                mean_iters_with_picard_cost=math.nan,
                pct_converged_in_picard=0.0,
                mean_picard_iters=math.nan,
            )
    return out


def write_timestep_csv(records: list[TimestepRecord], net: Network) -> str:
    """Render records in the timestep CSV format (one pressure column per zone)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "timestamp",
            "strategy",
            "picard_iters",
            "newton_iters",
            "converged_in_picard",
            "picard_aborted",
            "max_residual_kg_s",
        ]
        + [f"p_{zone.id}" for zone in net.zones]
    )
    for rec in records:
        writer.writerow(
            [
                rec.timestamp,
                rec.strategy,
                rec.picard_iters,
                rec.newton_iters,
                "true" if rec.converged_in_picard else "false",
                rec.picard_aborted or "",
                f"{rec.max_residual:.9g}",
            ]
            + [f"{p:.9g}" for p in rec.pressures]
        )
    return out.getvalue()
