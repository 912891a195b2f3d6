"""Small parsers for CLI-facing quantities: byte sizes, durations, dates."""

from __future__ import annotations

import datetime as dt
import re

_SIZE_UNITS = {
    "": 1,
    "B": 1,
    "KB": 10**3,
    "MB": 10**6,
    "GB": 10**9,
    "TB": 10**12,
    "PB": 10**15,
}

_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}

_SIZE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([A-Za-z]*)\s*$")
_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([smhd]?)\s*$")


def parse_size(text: str) -> int:
    """'40TB' -> 40_000_000_000_000. Decimal units; bare numbers are bytes."""
    match = _SIZE_RE.match(text)
    if not match:
        raise ValueError(f"unparseable size: {text!r}")
    value, unit = match.groups()
    unit = unit.upper()
    if unit not in _SIZE_UNITS:
        raise ValueError(f"unknown size unit {unit!r} in {text!r}")
    size = int(round(float(value) * _SIZE_UNITS[unit]))
    if size <= 0:
        raise ValueError(f"size must be positive: {text!r}")
    return size


def parse_duration(text: str) -> int:
    """'1.2d' -> 103680 seconds; bare numbers are seconds."""
    match = _DURATION_RE.match(text)
    if not match:
        raise ValueError(f"unparseable duration: {text!r}")
    value, unit = match.groups()
    seconds = int(round(float(value) * _DURATION_UNITS[unit or "s"]))
    if seconds < 0:
        raise ValueError(f"duration must be non-negative: {text!r}")
    return seconds


def parse_date(text: str) -> dt.date:
    """YYYY-MM-DD or YYYYMMDD."""
    cleaned = text.strip()
    for fmt in ("%Y-%m-%d", "%Y%m%d"):
        try:
            return dt.datetime.strptime(cleaned, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date: {text!r}")


def parse_date_range(text: str) -> tuple[dt.date, dt.date]:
    """'2021-08-01:2021-08-31' (colon separated); single date means one day."""
    cleaned = text.strip()
    if ":" in cleaned:
        first, _, second = cleaned.partition(":")
        start, end = parse_date(first), parse_date(second)
    else:
        start = end = parse_date(cleaned)
    if end < start:
        raise ValueError(f"date range ends before it starts: {text!r}")
    return start, end


def parse_size_list(text: str) -> list[int]:
    """Comma-separated sizes: '40TB,48TB,56TB'."""
    parts = [part for part in text.split(",") if part.strip()]
    if not parts:
        raise ValueError("empty size list")
    return [parse_size(part) for part in parts]


def format_bytes(value: float) -> str:
    """Human-readable decimal rendering, e.g. 40000000000000 -> '40TB'."""
    for unit in ("PB", "TB", "GB", "MB", "KB"):
        scale = _SIZE_UNITS[unit]
        if abs(value) >= scale:
            scaled = value / scale
            if abs(scaled - round(scaled)) < 1e-9:
                return f"{round(scaled)}{unit}"
            return f"{scaled:.2f}{unit}"
    return f"{round(value)}B"
