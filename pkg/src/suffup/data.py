"""Right-censored survival samples: data model, CSV ingestion and summaries."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Union

import numpy as np


class SurvivalDataError(ValueError):
    """Base class for invalid survival data."""


class MalformedRow(SurvivalDataError):
    pass


class NonPositiveTime(SurvivalDataError):
    pass


class UnknownStatus(SurvivalDataError):
    pass


class EmptySample(SurvivalDataError):
    pass


class MissingEventTime(SurvivalDataError):
    """Raised when an operation needs at least one uncensored observation."""

    def __init__(self, msg: str = "no uncensored observations"):
        super().__init__(msg)


class Status(enum.IntEnum):
    CENSORED = 0
    EVENT = 1


@dataclass(frozen=True)
class Observation:
    time: float
    status: Status

    def __post_init__(self):
        if not math.isfinite(self.time):
            raise NonPositiveTime(f"time must be finite, got {self.time!r}")
        if self.time <= 0:
            raise NonPositiveTime(f"time must be strictly positive, got {self.time!r}")
        object.__setattr__(self, "status", Status(self.status))

    @property
    def is_event(self) -> bool:
        return self.status is Status.EVENT


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SurvivalSample:
    """Validated, sorted sample of ``(time, status)`` pairs.

    Observations are kept ascending by time; at equal times events come
    before censorings. Storage is a pair of read-only numpy arrays so that
    large registries and bootstrap loops stay cheap.

    Parameters
    ----------
    times : array_like of float
        Observed times ``min(T, C)``; finite and strictly positive.
    events : array_like of bool or {0, 1}
        ``True``/``1`` when the time is an observed failure.
    """

    __slots__ = ("_times", "_events")

    def __init__(self, times, events):
        t = np.asarray(times, dtype=float).ravel()
        e_raw = np.asarray(events).ravel()
        if t.shape != e_raw.shape:
            raise MalformedRow("times and events must have the same length")
        if t.size == 0:
            raise EmptySample("sample has no observations")
        if not np.all(np.isfinite(t)):
            raise NonPositiveTime("times must be finite")
        if np.any(t <= 0):
            raise NonPositiveTime("times must be strictly positive")
        if e_raw.dtype != bool:
            bad = ~np.isin(e_raw, (0, 1))
            if np.any(bad):
                raise UnknownStatus(f"status must be 0 or 1, got {e_raw[bad][0]!r}")
        e = e_raw.astype(bool)
        # primary key time, secondary key: events (0) before censorings (1)
        order = np.lexsort((~e, t))
        self._times = _frozen(t[order].copy())
        self._events = _frozen(e[order].copy())

    @classmethod
    def from_observations(cls, observations: Iterable[Observation]) -> "SurvivalSample":
        obs = list(observations)
        return cls([o.time for o in obs], [o.is_event for o in obs])

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def events(self) -> np.ndarray:
        return self._events

    @property
    def n(self) -> int:
        return int(self._times.size)

    def __len__(self) -> int:
        return self.n

    @property
    def observations(self) -> tuple[Observation, ...]:
        return tuple(
            Observation(float(t), Status.EVENT if e else Status.CENSORED)
            for t, e in zip(self._times, self._events)
        )

    @property
    def t_max(self) -> float:
        return float(self._times[-1])

    @property
    def t_max_event(self) -> Optional[float]:
        ev = self._times[self._events]
        return float(ev[-1]) if ev.size else None

    def scaled(self, factor: float) -> "SurvivalSample":
        return SurvivalSample(self._times * factor, self._events)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurvivalSample):
            return NotImplemented
        return np.array_equal(self._times, other._times) and np.array_equal(
            self._events, other._events
        )

    def __hash__(self):
        return hash((self._times.tobytes(), self._events.tobytes()))

    def __repr__(self) -> str:
        return f"SurvivalSample(n={self.n}, events={int(self._events.sum())})"


@dataclass(frozen=True)
class SampleSummary:
    n: int
    n_events: int
    censoring_rate: float
    t_max: float
    t_max_event: Optional[float]
    median_event_time: Optional[float]
    plateau_censored_count: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "n_events": self.n_events,
            "censoring_rate": self.censoring_rate,
            "t_max": self.t_max,
            "t_max_event": self.t_max_event,
            "median_event_time": self.median_event_time,
            "plateau_censored_count": self.plateau_censored_count,
        }


def summarize(sample: SurvivalSample) -> SampleSummary:
    """Counts, censoring rate and plateau description of a sample.

    ``median_event_time`` is the sample median of the uncensored times, which
    is how registry summaries usually quote it; it is not a KM median.
    """
    n = sample.n
    ev_times = sample.times[sample.events]
    n_events = int(ev_times.size)
    t_max_event = float(ev_times[-1]) if n_events else None
    if t_max_event is None:
        plateau = 0
    else:
        plateau = int(np.count_nonzero(~sample.events & (sample.times > t_max_event)))
    return SampleSummary(
        n=n,
        n_events=n_events,
        censoring_rate=(n - n_events) / n,
        t_max=sample.t_max,
        t_max_event=t_max_event,
        median_event_time=float(np.median(ev_times)) if n_events else None,
        plateau_censored_count=plateau,
    )


Source = Union[str, bytes, IO[str], IO[bytes]]


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_csv(source: Source) -> SurvivalSample:
    """Parse a ``time,status`` CSV into a sorted sample.

    `source` may be the CSV text itself, raw bytes, or an open file (text or
    binary). Status must be ``0`` (censored) or ``1`` (event). Blank lines are
    skipped; LF and CRLF line endings are both accepted.
    """
    text = _read_text(source)
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["time", "status"]:
        raise MalformedRow(f"expected header 'time,status', got {header!r}")
    times: list[float] = []
    events: list[bool] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise MalformedRow(f"line {lineno}: expected 2 columns, got {len(row)}")
        t_str, s_str = row[0].strip(), row[1].strip()
        try:
            t = float(t_str)
        except ValueError:
            raise MalformedRow(f"line {lineno}: cannot parse time {t_str!r}") from None
        if not math.isfinite(t):
            raise MalformedRow(f"line {lineno}: time must be finite, got {t_str!r}")
        if t <= 0:
            raise NonPositiveTime(f"line {lineno}: time must be > 0, got {t_str!r}")
        if s_str == "1":
            events.append(True)
        elif s_str == "0":
            events.append(False)
        else:
            try:
                float(s_str)
            except ValueError:
                raise MalformedRow(f"line {lineno}: cannot parse status {s_str!r}") from None
            raise UnknownStatus(f"line {lineno}: status must be 0 or 1, got {s_str!r}")
        times.append(t)
    if not times:
        raise EmptySample("no observations in input")
    return SurvivalSample(times, events)


def to_csv(sample: SurvivalSample) -> str:
    """Serialize with ``repr`` floats so that :func:`load_csv` round-trips exactly."""
    lines = ["time,status"]
    lines.extend(f"{float(t)!r},{int(e)}" for t, e in zip(sample.times, sample.events))
    return "\n".join(lines) + "\n"
