"""Keyphrase-anchored scanner for XRootD-style daily server logs.

Lines are classified by substring keyphrases, mined for fields near the
anchor, and merged across files into a single time-ordered event stream.
The scanner is deliberately tolerant: lines it cannot mine are counted and
skipped, never fatal. Files are streamed line by line, so memory stays
bounded by the per-file open-session table regardless of log size.
"""

from __future__ import annotations

import datetime as dt
import gzip
import heapq
import logging
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator

from .events import (
    KIND_CLOSE,
    KIND_OPEN,
    KIND_READ,
    KIND_READV,
    KIND_TRANSFER,
    Close,
    Open,
    Read,
    ReadV,
    SessionKey,
    TraceEvent,
    Transfer,
    parse_timestamp,
)

logger = logging.getLogger(__name__)

TRANSFER_KEYPHRASE = "successfuly read size from info file ="
READV_KEYPHRASE = "fh=0 readV"
READ_KEYPHRASE = "req=read"
CLOSE_KEYPHRASE = "prefetch score"

# "open r"/"open rat" only count with a following whitespace-delimited path;
# the bare phrase is too easy to hit inside unrelated tokens.
_OPEN_ANCHOR = re.compile(r"\bopen r(?:at)?\s+(\S+)")

_PAIR = re.compile(r"(?<![\w@])(\d+)@(\d+)(?![\w@])")
_LEADING_TS = re.compile(r"^(\d{6} \d{2}:\d{2}:\d{2})\b")
_BRACKET_TS = re.compile(r"\[(\d{6} \d{2}:\d{2}:\d{2})\]")
_TID = re.compile(r"\btid=(\S+)")
_UID = re.compile(r"\buid=(\S+)")
_FN_TOKEN = re.compile(r"\bfn=(\S+)")
_SLASH_TOKEN = re.compile(r"(?:^|\s)(/\S+)")
_TRANSFER_SIZE = re.compile(re.escape(TRANSFER_KEYPHRASE) + r"\s*(\d+)\b")

_LOG_FILE_NAME = re.compile(r"^xrootd-(\d{8})\.log(\.gz)?$")


class MalformedLine(ValueError):
    """A line matched a keyphrase but a required field could not be mined."""


@dataclass
class ParseReport:
    """Counters accumulated over one parsing run.

    ``lines_matched`` counts keyphrase hits per event kind, including lines
    that later turned out malformed, so for each kind:
    emitted events + malformed lines of that kind == lines_matched[kind].
    """

    lines_total: int = 0
    lines_matched: dict[str, int] = field(default_factory=dict)
    readv_unresolved: int = 0
    malformed: int = 0
    field_warnings: int = 0
    byte_volume_scanned: int = 0
    files_scanned: int = 0
    files_skipped: int = 0


def classify_line(line: str) -> str | None:
    """Event kind for a log line, or ``None`` when no keyphrase matches.

    Precedence when several keyphrases co-occur:
    transfer > readv > read > close > open.
    """
    if TRANSFER_KEYPHRASE in line:
        return KIND_TRANSFER
    if READV_KEYPHRASE in line:
        return KIND_READV
    if READ_KEYPHRASE in line:
        return KIND_READ
    if CLOSE_KEYPHRASE in line:
        return KIND_CLOSE
    if _OPEN_ANCHOR.search(line):
        return KIND_OPEN
    return None


def _timestamp(line: str) -> int:
    match = _LEADING_TS.match(line) or _BRACKET_TS.search(line)
    if match is None:
        raise MalformedLine("missing timestamp")
    try:
        return parse_timestamp(match.group(1))
    except ValueError as exc:
        raise MalformedLine(f"bad timestamp: {exc}") from None


def _session(line: str) -> SessionKey:
    tid = _TID.search(line)
    uid = _UID.search(line)
    if tid is None or uid is None:
        raise MalformedLine("missing tid/uid session fields")
    return SessionKey(sys.intern(tid.group(1)), sys.intern(uid.group(1)))


def _slash_path(line: str) -> str:
    match = _SLASH_TOKEN.search(line)
    if match is None:
        raise MalformedLine("missing path")
    return sys.intern(match.group(1))


def parse_read(line: str) -> Read:
    """Mine a single-range read: first size@offset pair plus fn= path."""
    ts = _timestamp(line)
    session = _session(line)
    pair = _PAIR.search(line)
    if pair is None:
        raise MalformedLine("missing size@offset pair")
    fn = _FN_TOKEN.search(line)
    path = sys.intern(fn.group(1)) if fn else _slash_path(line)
    return Read(ts, session, path, int(pair.group(1)), int(pair.group(2)))


def parse_readv(line: str) -> ReadV:
    """Mine a vector read; the path stays unresolved until session matching."""
    ts = _timestamp(line)
    session = _session(line)
    chunks = tuple((int(s), int(o)) for s, o in _PAIR.findall(line))
    if not chunks:
        raise MalformedLine("missing size@offset chunks")
    return ReadV(ts, session, chunks)


def parse_open(line: str) -> Open:
    ts = _timestamp(line)
    session = _session(line)
    anchored = _OPEN_ANCHOR.search(line)
    if anchored is not None and anchored.group(1).startswith("/"):
        path = sys.intern(anchored.group(1))
    else:
        path = _slash_path(line)
    return Open(ts, session, path)


def parse_close(line: str) -> Close:
    return Close(_timestamp(line), _session(line), _slash_path(line))


def parse_transfer(line: str) -> Transfer:
    ts = _timestamp(line)
    size_match = _TRANSFER_SIZE.search(line)
    if size_match is None:
        raise MalformedLine("missing transfer size")
    size = int(size_match.group(1))
    if size == 0:
        raise MalformedLine("zero-byte transfer")
    return Transfer(ts, _slash_path(line), size)


_PARSERS = {
    KIND_READ: parse_read,
    KIND_READV: parse_readv,
    KIND_OPEN: parse_open,
    KIND_CLOSE: parse_close,
    KIND_TRANSFER: parse_transfer,
}


def _scan_lines(lines: Iterable[bytes], report: ParseReport) -> Iterator[tuple[int, TraceEvent]]:
    for line_no, raw in enumerate(lines):
        report.lines_total += 1
        report.byte_volume_scanned += len(raw)
        line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
        kind = classify_line(line)
        if kind is None:
            continue
        report.lines_matched[kind] = report.lines_matched.get(kind, 0) + 1
        try:
            event = _PARSERS[kind](line)
        except MalformedLine as exc:
            report.malformed += 1
            logger.debug("malformed %s line %d: %s", kind, line_no + 1, exc)
            continue
        if kind == KIND_READ and len(_PAIR.findall(line)) > 1:
            # A read line should carry exactly one pair; keep the first.
            report.field_warnings += 1
            logger.debug("extra size@offset pairs on read line %d", line_no + 1)
        yield line_no, event


def _resolve(
    numbered: Iterator[tuple[int, TraceEvent]], report: ParseReport
) -> Iterator[tuple[int, TraceEvent]]:
    sessions: dict[SessionKey, str] = {}
    for line_no, event in numbered:
        if isinstance(event, Open):
            sessions[event.session] = event.path
        elif isinstance(event, ReadV) and event.path is None:
            path = sessions.get(event.session)
            if path is None:
                report.readv_unresolved += 1
            else:
                event = replace(event, path=path)
        yield line_no, event


def resolve_readv(events: Iterable[TraceEvent]) -> tuple[list[TraceEvent], int]:
    """Attach to each vector read the path of the most recent preceding open
    with the same session key. Returns the new list and the count of readV
    events that had no candidate open."""
    report = ParseReport()
    resolved = [e for _, e in _resolve(enumerate(events), report)]
    return resolved, report.readv_unresolved


def _open_log(path: Path) -> IO[bytes]:
    if path.name.endswith(".gz"):
        return gzip.open(path, "rb")  # type: ignore[return-value]
    return open(path, "rb")


def _file_stream(
    path: Path,
    file_index: int,
    report: ParseReport,
    time_range: tuple[int, int] | None,
    skip_unreadable: bool,
) -> Iterator[tuple[int, int, int, TraceEvent]]:
    try:
        handle = _open_log(path)
    except OSError as exc:
        if not skip_unreadable:
            raise
        report.files_skipped += 1
        logger.warning("skipping unreadable log %s: %s", path, exc)
        return
    with handle:
        report.files_scanned += 1
        numbered = _resolve(_scan_lines(handle, report), report)
        while True:
            try:
                line_no, event = next(numbered)
            except StopIteration:
                return
            except (OSError, EOFError) as exc:
                if not skip_unreadable:
                    raise
                report.files_skipped += 1
                logger.warning("abandoning log %s mid-read: %s", path, exc)
                return
            if time_range is not None and not (time_range[0] <= event.ts <= time_range[1]):
                continue
            yield event.ts, file_index, line_no, event


def stream_logs(
    files: Iterable[str | Path],
    time_range: tuple[int, int] | None = None,
    *,
    report: ParseReport | None = None,
    skip_unreadable: bool = False,
) -> Iterator[TraceEvent]:
    """Stream every event of every file, globally time-ordered.

    Events within each file are assumed non-decreasing in time (daily logs
    are written that way); the stable k-way merge breaks timestamp ties by
    file order, then line order. ``time_range`` is a closed epoch-second
    interval; events exactly at either boundary are kept. ReadV resolution
    is scoped per file and resets at file boundaries. When ``report`` is
    given, it is filled in while the stream is consumed.
    """
    if report is None:
        report = ParseReport()
    if time_range is not None and time_range[0] > time_range[1]:
        raise ValueError("time range start exceeds end")
    streams = [
        _file_stream(Path(p), index, report, time_range, skip_unreadable)
        for index, p in enumerate(files)
    ]
    for _, _, _, event in heapq.merge(*streams):
        yield event


def parse_logs(
    files: Iterable[str | Path],
    time_range: tuple[int, int] | None = None,
    *,
    skip_unreadable: bool = False,
) -> tuple[list[TraceEvent], ParseReport]:
    """Eager wrapper around :func:`stream_logs`; returns (events, report)."""
    report = ParseReport()
    events = list(stream_logs(files, time_range, report=report, skip_unreadable=skip_unreadable))
    return events, report


def select_log_files(
    log_dir: str | Path,
    start_day: dt.date | None = None,
    end_day: dt.date | None = None,
) -> list[Path]:
    """Daily log files ("xrootd-YYYYMMDD.log[.gz]") under ``log_dir`` whose
    filename date falls in the inclusive day range, sorted chronologically."""
    selected = []
    for child in sorted(Path(log_dir).iterdir()):
        match = _LOG_FILE_NAME.match(child.name)
        if match is None:
            continue
        try:
            day = dt.datetime.strptime(match.group(1), "%Y%m%d").date()
        except ValueError:
            logger.debug("ignoring log with unparseable date: %s", child.name)
            continue
        if start_day is not None and day < start_day:
            continue
        if end_day is not None and day > end_day:
            continue
        selected.append(child)
    return selected
