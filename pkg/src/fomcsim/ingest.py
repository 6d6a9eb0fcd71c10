"""File-based ingestion of per-meeting snapshots.

Layout of a data root::

    calendar.csv                      meeting_id,actual_delta_bps
    indicators/<variable>.csv         availability_date,value
    <meeting_id>/beige_book.txt
    <meeting_id>/dotplot.json         {"year_buckets": {"2024": {"4.25-4.50%": 10}}}
    <meeting_id>/fedwatch.txt
    <meeting_id>/statement.txt        realized statement; scoring only

Every indicator is aligned to the last observation available at least two
calendar days before the meeting.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping

from .core import FomcSimError, InvalidInputError, MeetingSnapshot, RateDecision, StructuredIndicators

logger = logging.getLogger(__name__)

AVAILABILITY_LAG = timedelta(days=2)
CATEGORICAL_VARIABLES = frozenset(StructuredIndicators.CATEGORICAL)
INDICATOR_VARIABLES = StructuredIndicators.NUMERIC + StructuredIndicators.CATEGORICAL


class DataError(FomcSimError):
    """Malformed or inconsistent input files."""


class MissingDataError(DataError):
    pass


class CalendarError(DataError):
    pass


@dataclass(frozen=True)
class IndicatorSeries:
    variable_name: str
    observations: tuple[tuple[date, float | str], ...]

    def __post_init__(self):
        obs = tuple((d if isinstance(d, date) else date.fromisoformat(d), v) for d, v in self.observations)
        for (d0, _), (d1, _) in zip(obs, obs[1:]):
            if d1 <= d0:
                raise DataError(f"{self.variable_name}: availability dates not strictly increasing at {d1}")
        for d, v in obs:
            if isinstance(v, float) and not math.isfinite(v):
                raise DataError(f"{self.variable_name}: non-finite value on {d}")
        object.__setattr__(self, "observations", obs)


@dataclass(frozen=True)
class MeetingCalendar:
    entries: tuple[tuple[str, RateDecision], ...]

    def __post_init__(self):
        entries = tuple((str(m), RateDecision(a)) for m, a in self.entries)
        ids = [date.fromisoformat(m) for m, _ in entries]
        for a, b in zip(ids, ids[1:]):
            if b <= a:
                raise CalendarError(f"meeting ids not strictly increasing at {b}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def meeting_ids(self) -> list[str]:
        return [m for m, _ in self.entries]

    def actual(self, meeting_id: str) -> RateDecision:
        for m, a in self.entries:
            if m == meeting_id:
                return a
        raise CalendarError(f"meeting {meeting_id} is not in the calendar")

    def distribution(self) -> dict[str, float]:
        """Share of hikes, cuts and holds."""
        n = len(self.entries)
        if n == 0:
            return {"hikes": 0.0, "cuts": 0.0, "holds": 0.0}
        return {
            "hikes": sum(a > 0 for _, a in self.entries) / n,
            "cuts": sum(a < 0 for _, a in self.entries) / n,
            "holds": sum(a == 0 for _, a in self.entries) / n,
        }


def align_indicator(series: IndicatorSeries, meeting_date: date | str):
    """Latest value whose availability date is at most two days before the meeting."""
    if isinstance(meeting_date, str):
        meeting_date = date.fromisoformat(meeting_date)
    if not series.observations:
        raise MissingDataError(f"{series.variable_name}: empty series")
    cutoff = meeting_date - AVAILABILITY_LAG
    chosen = None
    for available, value in series.observations:
        if available > cutoff:
            break
        chosen = value
    if chosen is None:
        raise MissingDataError(
            f"no {series.variable_name} observation available by {cutoff} for meeting {meeting_date}"
        )
    return chosen


_RANGE_RE = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*-\s*(-?\d+(?:\.\d+)?)\s*%?\s*$")


def range_lower_bound(label: str) -> float:
    m = _RANGE_RE.match(label)
    if not m:
        raise DataError(f"unparseable dot-plot range label {label!r}")
    return float(m.group(1))


def validate_dotplot(year_buckets: Mapping) -> dict[int, dict[str, int]]:
    """Normalize a ``year -> range label -> count`` mapping; counts must be positive ints."""
    out: dict[int, dict[str, int]] = {}
    for year, buckets in year_buckets.items():
        try:
            y = int(year)
        except (TypeError, ValueError):
            raise DataError(f"dot-plot year {year!r} is not an integer") from None
        if not isinstance(buckets, Mapping):
            raise DataError(f"dot-plot year {year}: expected an object of range counts")
        parsed: dict[str, int] = {}
        for label, count in buckets.items():
            range_lower_bound(label)
            if isinstance(count, bool) or not isinstance(count, int) or count <= 0:
                raise DataError(f"dot-plot {y} {label}: count must be a positive integer, got {count!r}")
            parsed[label] = count
        out[y] = parsed
    return out


@dataclass(frozen=True)
class DotPlot:
    year_buckets: Mapping[int, Mapping[str, int]]

    def __post_init__(self):
        object.__setattr__(self, "year_buckets", validate_dotplot(self.year_buckets))


def verbalize_dotplot(dp: DotPlot | Mapping) -> str:
    """Render dot-plot counts as ``Year {Y}: {range}: {n} members`` lines."""
    dp = dp.year_buckets if isinstance(dp, DotPlot) else validate_dotplot(dp)
    lines = []
    for year in sorted(dp):
        for label in sorted(dp[year], key=range_lower_bound):
            lines.append(f"Year {year}: {label}: {dp[year][label]} members")
    return "\n".join(lines)


_LINE_RE = re.compile(r"^Year (\d+): (.+): (\d+) members$")


def parse_verbalized_dotplot(text: str) -> dict[int, dict[str, int]]:
    """Inverse of :func:`verbalize_dotplot`."""
    out: dict[int, dict[str, int]] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise DataError(f"not a dot-plot line: {line!r}")
        out.setdefault(int(m.group(1)), {})[m.group(2)] = int(m.group(3))
    return out


def load_dotplot(path: Path) -> dict[int, dict[str, int]]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(payload, dict) or not isinstance(payload.get("year_buckets"), dict):
        raise DataError(f"{path}:1:1: expected an object with a 'year_buckets' mapping")
    try:
        return validate_dotplot(payload["year_buckets"])
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def load_calendar(file: str | Path) -> MeetingCalendar:
    path = Path(file)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CalendarError(f"{path}: empty calendar")
        missing = {"meeting_id", "actual_delta_bps"} - set(reader.fieldnames)
        if missing:
            raise CalendarError(f"{path}: missing columns {sorted(missing)}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            try:
                date.fromisoformat(row["meeting_id"])
                entries.append((row["meeting_id"], RateDecision(int(row["actual_delta_bps"]))))
            except (ValueError, InvalidInputError) as exc:
                raise CalendarError(f"{path}:{lineno}: {exc}") from None
    if not entries:
        raise CalendarError(f"{path}: empty calendar")
    return MeetingCalendar(tuple(entries))


def load_series(path: str | Path, variable_name: str | None = None) -> IndicatorSeries:
    path = Path(path)
    name = variable_name or path.stem
    categorical = name in CATEGORICAL_VARIABLES
    obs = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"availability_date", "value"}:
            raise DataError(f"{path}: expected header availability_date,value")
        for lineno, row in enumerate(reader, start=2):
            try:
                d = date.fromisoformat(row["availability_date"])
                v = row["value"].strip() if categorical else float(row["value"])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            obs.append((d, v))
    return IndicatorSeries(name, tuple(obs))


def load_series_set(indicator_dir: str | Path) -> dict[str, IndicatorSeries]:
    indicator_dir = Path(indicator_dir)
    return {p.stem: load_series(p) for p in sorted(indicator_dir.glob("*.csv"))}


def align_indicators(series_set: Mapping[str, IndicatorSeries] | Iterable[IndicatorSeries],
                     meeting_date: date) -> StructuredIndicators:
    if not isinstance(series_set, Mapping):
        series_set = {s.variable_name: s for s in series_set}
    values = {}
    for name in INDICATOR_VARIABLES:
        if name not in series_set:
            raise MissingDataError(f"no series for {name} (meeting {meeting_date})")
        values[name] = align_indicator(series_set[name], meeting_date)
    values["prev_change_bps"] = int(round(values["prev_change_bps"]))
    try:
        return StructuredIndicators(**values)
    except InvalidInputError as exc:
        raise DataError(f"meeting {meeting_date}: {exc}") from None


def _read_optional(path: Path) -> str:
    if not path.exists():
        logger.warning("%s missing; using empty text", path)
        return ""
    return path.read_text(encoding="utf-8")


def load_snapshot(meeting_dir: str | Path, calendar: MeetingCalendar,
                  series_set: Mapping[str, IndicatorSeries] | Iterable[IndicatorSeries]) -> MeetingSnapshot:
    """Assemble the aligned snapshot for the meeting named by ``meeting_dir``.

    Beige Book and FedWatch text pass through unmodified; the instruction
    preamble is added when prompts are built.
    """
    meeting_dir = Path(meeting_dir)
    meeting_id = meeting_dir.name
    actual = calendar.actual(meeting_id)
    indicators = align_indicators(series_set, date.fromisoformat(meeting_id))
    dotplot_path = meeting_dir / "dotplot.json"
    if dotplot_path.exists():
        dotplot_text = verbalize_dotplot(load_dotplot(dotplot_path))
    else:
        logger.warning("%s missing; using empty dot plot", dotplot_path)
        dotplot_text = ""
    return MeetingSnapshot(
        meeting_id=meeting_id,
        indicators=indicators,
        beige_book=_read_optional(meeting_dir / "beige_book.txt"),
        dotplot_verbalized=dotplot_text,
        fedwatch_text=_read_optional(meeting_dir / "fedwatch.txt"),
        actual=actual,
    )


def load_actual_statement(meeting_dir: str | Path) -> str | None:
    path = Path(meeting_dir) / "statement.txt"
    return path.read_text(encoding="utf-8") if path.exists() else None


class DataTree:
    """Convenience view over a data root directory."""

    def __init__(self, root: str | Path, calendar: str | Path | None = None):
        self.root = Path(root)
        self.calendar_path = Path(calendar) if calendar else self.root / "calendar.csv"
        self.calendar = load_calendar(self.calendar_path)
        self.series_set = load_series_set(self.root / "indicators")

    def meeting_dir(self, meeting_id: str) -> Path:
        return self.root / meeting_id

    def snapshot(self, meeting_id: str, calendar: MeetingCalendar | None = None) -> MeetingSnapshot:
        return load_snapshot(self.meeting_dir(meeting_id), calendar or self.calendar, self.series_set)

    def snapshots(self) -> list[MeetingSnapshot]:
        return [self.snapshot(m) for m in self.calendar.meeting_ids]

    def actual_statement(self, meeting_id: str) -> str | None:
        return load_actual_statement(self.meeting_dir(meeting_id))
