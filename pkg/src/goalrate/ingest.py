"""Reading goal-event datasets and tallying goals per minute of regular time.

Two CSV layouts are understood:

* events:  ``year,match_id,minute,period,goal_kind``, one row per goal;
* tallied: ``minute,count``, exactly one row for each minute 1..90.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

N_MINUTES = 90
HALF_LENGTH = 45

EVENTS_HEADER = ("year", "match_id", "minute", "period", "goal_kind")
TALLIED_HEADER = ("minute", "count")


class DatasetError(ValueError):
    """Raised for malformed input data. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Period(str, enum.Enum):
    REGULAR = "regular"
    ADDITIONAL = "additional"
    EXTRA = "extra"


class GoalKind(str, enum.Enum):
    GOAL = "goal"
    PENALTY = "penalty"
    OWN_GOAL = "own_goal"


@dataclass(frozen=True)
class GoalEvent:
    year: int
    match_id: str
    minute: int
    period: Period
    goal_kind: GoalKind

    def __post_init__(self):
        if self.minute < 1:
            raise DatasetError(f"minute must be >= 1, got {self.minute}")
        if self.period is Period.REGULAR and self.minute > N_MINUTES:
            raise DatasetError(f"regular-time goal at minute {self.minute} > {N_MINUTES}")
        if self.period is Period.EXTRA and self.minute <= N_MINUTES:
            raise DatasetError(f"extra-time goal at minute {self.minute} <= {N_MINUTES}")

    def as_row(self) -> list[str]:
        return [str(self.year), self.match_id, str(self.minute), self.period.value, self.goal_kind.value]


@dataclass(frozen=True)
class MinuteCounts:
    """Goals per minute 1..90; ``counts[m - 1]`` holds minute ``m``."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (N_MINUTES,):
            raise ValueError(f"expected {N_MINUTES} per-minute counts, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if not np.all(counts == np.round(counts)):
            raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def at(self, minute: int) -> int:
        if not 1 <= minute <= N_MINUTES:
            raise IndexError(f"minute {minute} outside 1..{N_MINUTES}")
        return int(self.counts[minute - 1])

    @property
    def first(self) -> np.ndarray:
        return self.counts[:HALF_LENGTH]

    @property
    def second(self) -> np.ndarray:
        return self.counts[HALF_LENGTH:]

    @property
    def total_first(self) -> int:
        return int(self.first.sum())

    @property
    def total_second(self) -> int:
        return int(self.second.sum())

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _parse_enum(enum_cls, token: str, line: int, field: str):
    try:
        return enum_cls(token)
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise DatasetError(f"unknown {field} token {token!r} (expected one of: {valid})", line) from None


def _parse_int(token: str, line: int, field: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DatasetError(f"{field} is not an integer: {token!r}", line) from None


def _read_header(reader, expected: tuple[str, ...]) -> None:
    header = next(reader, None)
    if header is None:
        raise DatasetError("empty input, missing header", 1)
    if tuple(h.strip() for h in header) != expected:
        raise DatasetError(f"bad header {','.join(header)!r}, expected {','.join(expected)!r}", 1)


def parse_dataset(source: TextIO | str) -> list[GoalEvent]:
    """Parse an events CSV into a list of :class:`GoalEvent`, keeping row order."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    _read_header(reader, EVENTS_HEADER)
    events = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(EVENTS_HEADER):
            raise DatasetError(f"expected {len(EVENTS_HEADER)} fields, got {len(row)}", line)
        year, match_id, minute, period, kind = (cell.strip() for cell in row)
        try:
            event = GoalEvent(
                year=_parse_int(year, line, "year"),
                match_id=match_id,
                minute=_parse_int(minute, line, "minute"),
                period=_parse_enum(Period, period, line, "period"),
                goal_kind=_parse_enum(GoalKind, kind, line, "goal_kind"),
            )
        except DatasetError as exc:
            if exc.line is None:
                raise DatasetError(str(exc), line) from None
            raise
        events.append(event)
    return events


def write_dataset(events: Iterable[GoalEvent], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(EVENTS_HEADER)
    for event in events:
        writer.writerow(event.as_row())


def parse_tallied(source: TextIO | str) -> MinuteCounts:
    """Parse a pre-tallied ``minute,count`` CSV with every minute 1..90 exactly once."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    _read_header(reader, TALLIED_HEADER)
    counts = np.zeros(N_MINUTES, dtype=np.int64)
    seen = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise DatasetError(f"expected 2 fields, got {len(row)}", line)
        minute = _parse_int(row[0].strip(), line, "minute")
        count = _parse_int(row[1].strip(), line, "count")
        if not 1 <= minute <= N_MINUTES:
            raise DatasetError(f"minute {minute} outside 1..{N_MINUTES}", line)
        if minute in seen:
            raise DatasetError(f"minute {minute} listed twice", line)
        if count < 0:
            raise DatasetError(f"negative count {count}", line)
        seen.add(minute)
        counts[minute - 1] = count
    missing = sorted(set(range(1, N_MINUTES + 1)) - seen)
    if missing:
        raise DatasetError(f"missing minutes: {missing}")
    return MinuteCounts(counts)


def write_tallied(counts: MinuteCounts, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(TALLIED_HEADER)
    for minute, count in enumerate(counts.counts, start=1):
        writer.writerow([minute, int(count)])


def sniff_format(text: str) -> str:
    """Return ``"events"`` or ``"tallied"`` from the header line."""
    header = tuple(h.strip() for h in text.splitlines()[0].split(",")) if text.strip() else ()
    if header == EVENTS_HEADER:
        return "events"
    if header == TALLIED_HEADER:
        return "tallied"
    raise DatasetError(f"unrecognised header {','.join(header)!r}", 1)


def load_counts(text: str, fmt: str | None = None) -> MinuteCounts:
    """Per-minute regular-time counts from CSV text in either layout."""
    fmt = fmt or sniff_format(text)
    if fmt == "events":
        return tally(filter_regular(parse_dataset(text)))
    if fmt == "tallied":
        return parse_tallied(text)
    raise ValueError(f"unknown format {fmt!r}")


def filter_regular(events: Iterable[GoalEvent]) -> list[GoalEvent]:
    return [e for e in events if e.period is Period.REGULAR]


def tally(events: Iterable[GoalEvent]) -> MinuteCounts:
    counts = np.zeros(N_MINUTES, dtype=np.int64)
    for e in events:
        if e.period is not Period.REGULAR:
            raise ValueError(f"cannot tally {e.period.value}-time goal; filter to regular time first")
        counts[e.minute - 1] += 1
    return MinuteCounts(counts)


def half_means(counts: MinuteCounts) -> tuple[float, float]:
    """Mean goals per minute in the first and second half."""
    return counts.total_first / HALF_LENGTH, counts.total_second / HALF_LENGTH
