"""Shared event vocabulary: trace events, session keys, timestamps, validation.

Timestamps are plain epoch seconds (UTC). Daily server logs carry second
resolution, and day-scale lifetime arithmetic never needs finer granularity.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400

#: Timestamp layout used at the head of every log line, e.g. "210801 12:34:56".
LOG_TIME_FORMAT = "%y%m%d %H:%M:%S"

_UTC = dt.timezone.utc

KIND_OPEN = "open"
KIND_CLOSE = "close"
KIND_READ = "read"
KIND_READV = "readv"
KIND_TRANSFER = "transfer"
EVENT_KINDS = (KIND_OPEN, KIND_CLOSE, KIND_READ, KIND_READV, KIND_TRANSFER)


def parse_timestamp(text: str) -> int:
    """Epoch seconds for a log timestamp such as "210801 12:34:56"."""
    return int(dt.datetime.strptime(text, LOG_TIME_FORMAT).replace(tzinfo=_UTC).timestamp())


def format_timestamp(ts: int) -> str:
    return dt.datetime.fromtimestamp(ts, tz=_UTC).strftime(LOG_TIME_FORMAT)


def day_of(ts: int) -> dt.date:
    return dt.datetime.fromtimestamp(ts, tz=_UTC).date()


def day_start(day: dt.date) -> int:
    """Epoch seconds at 00:00:00 UTC of the given calendar day."""
    return int(dt.datetime.combine(day, dt.time.min, tzinfo=_UTC).timestamp())


@dataclass(frozen=True, slots=True)
class SessionKey:
    """Thread id / user id pair used to correlate vector reads with opens."""

    thread_id: str
    user_id: str


@dataclass(frozen=True, slots=True)
class Open:
    ts: int
    session: SessionKey
    path: str


@dataclass(frozen=True, slots=True)
class Close:
    ts: int
    session: SessionKey
    path: str


@dataclass(frozen=True, slots=True)
class Read:
    ts: int
    session: SessionKey
    path: str
    size: int
    offset: int


@dataclass(frozen=True, slots=True)
class ReadV:
    """Vector read: one or more (size, offset) chunks on a single log line.

    The log line itself carries no filename; ``path`` stays ``None`` until the
    event is resolved against a preceding open with the same session key.
    """

    ts: int
    session: SessionKey
    chunks: tuple[tuple[int, int], ...]
    path: str | None = None

    @property
    def total_size(self) -> int:
        return sum(size for size, _ in self.chunks)


@dataclass(frozen=True, slots=True)
class Transfer:
    """Whole-file fetch into the cache; in replay these mark cache misses."""

    ts: int
    path: str
    size: int


TraceEvent = Open | Close | Read | ReadV | Transfer

_KIND_BY_TYPE = {Open: KIND_OPEN, Close: KIND_CLOSE, Read: KIND_READ,
                 ReadV: KIND_READV, Transfer: KIND_TRANSFER}


def kind_of(event: TraceEvent) -> str:
    return _KIND_BY_TYPE[type(event)]


def _bad_path(path: str) -> str | None:
    if not path:
        return "empty path"
    if "\n" in path:
        return "path contains a newline"
    return None


def _bad_session(session: SessionKey) -> str | None:
    if not session.thread_id:
        return "empty thread id"
    if not session.user_id:
        return "empty user id"
    return None


def validate_event(event: TraceEvent) -> str | None:
    """Return ``None`` when the event satisfies every type invariant, else a
    short description of the first violation found."""
    if event.ts < 0:
        return "negative timestamp"
    if isinstance(event, Transfer):
        if event.size == 0:
            return "zero-byte transfer"
        if event.size < 0:
            return "negative transfer size"
        return _bad_path(event.path)
    problem = _bad_session(event.session)
    if problem:
        return problem
    if isinstance(event, (Open, Close)):
        return _bad_path(event.path)
    if isinstance(event, Read):
        if event.size < 0:
            return "negative read size"
        if event.offset < 0:
            return "negative read offset"
        return _bad_path(event.path)
    # ReadV: path may legitimately be unresolved.
    if not event.chunks:
        return "empty chunk sequence"
    for size, offset in event.chunks:
        if size < 0:
            return "negative chunk size"
        if offset < 0:
            return "negative chunk offset"
    if event.path is not None:
        return _bad_path(event.path)
    return None
