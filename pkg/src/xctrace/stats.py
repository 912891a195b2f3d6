"""Aggregate statistics over trace event streams.

Three families live here: read accounting (per-file counts plus byte/offset
means), file-lifetime segmentation (gap-threshold grouping of opens, the
threshold sweep used to justify the gap, quantile reports), and histogram /
power-law fitting utilities applied to lifetime distributions.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .events import (
    SECONDS_PER_DAY,
    SECONDS_PER_HOUR,
    Close,
    Open,
    Read,
    ReadV,
    TraceEvent,
    Transfer,
)

logger = logging.getLogger(__name__)

#: Reserved per-file bucket for readV operations that never resolved to a file.
UNRESOLVED_KEY = "<unresolved>"

#: Default gap threshold separating two lifetimes of the same file: 1.2 days
#: (exactly 28.8 hours).
DEFAULT_GAP_THRESHOLD_SECONDS = int(1.2 * SECONDS_PER_DAY)


# ---------------------------------------------------------------------------
# read accounting


@dataclass
class ReadStats:
    """Mergeable read-operation statistics for a whole stream.

    A Read or ReadV counts as one operation against its path (unresolved
    readVs land in UNRESOLVED_KEY); every size@offset pair -- including each
    chunk of a readV -- contributes one size sample and one offset sample to
    the byte statistics. Integer fields are exact; means are derived.
    """

    per_file_counts: dict[str, int] = field(default_factory=dict)
    total_read_ops: int = 0
    total_bytes_read: int = 0
    size_samples: int = 0
    total_offset: int = 0

    def observe(self, event: TraceEvent) -> None:
        if isinstance(event, Read):
            self._bump(event.path, 1)
            self.total_bytes_read += event.size
            self.total_offset += event.offset
            self.size_samples += 1
        elif isinstance(event, ReadV):
            key = event.path if event.path is not None else UNRESOLVED_KEY
            self._bump(key, 1)
            for size, offset in event.chunks:
                self.total_bytes_read += size
                self.total_offset += offset
                self.size_samples += 1

    def _bump(self, path: str, n: int) -> None:
        self.per_file_counts[path] = self.per_file_counts.get(path, 0) + n
        self.total_read_ops += n

    def merge(self, other: "ReadStats") -> "ReadStats":
        counts = dict(self.per_file_counts)
        for path, n in other.per_file_counts.items():
            counts[path] = counts.get(path, 0) + n
        return ReadStats(
            per_file_counts=counts,
            total_read_ops=self.total_read_ops + other.total_read_ops,
            total_bytes_read=self.total_bytes_read + other.total_bytes_read,
            size_samples=self.size_samples + other.size_samples,
            total_offset=self.total_offset + other.total_offset,
        )

    @property
    def distinct_files(self) -> int:
        """Files with at least one read, excluding the unresolved bucket."""
        return sum(1 for path in self.per_file_counts if path != UNRESOLVED_KEY)

    @property
    def mean_reads_per_file(self) -> float | None:
        """total operations / distinct files; absent when no file was read."""
        files = self.distinct_files
        return self.total_read_ops / files if files else None

    @property
    def mean_read_size(self) -> float:
        return self.total_bytes_read / self.size_samples if self.size_samples else 0.0

    @property
    def mean_offset(self) -> float:
        return self.total_offset / self.size_samples if self.size_samples else 0.0


def count_reads_per_file(events: Iterable[TraceEvent]) -> ReadStats:
    """Single-pass ReadStats over the stream."""
    stats = ReadStats()
    for event in events:
        stats.observe(event)
    return stats


def read_size_stats(events: Iterable[TraceEvent]) -> tuple[int, float, float]:
    """(total_bytes_read, mean_read_size, mean_offset) over every chunk."""
    stats = count_reads_per_file(events)
    return stats.total_bytes_read, stats.mean_read_size, stats.mean_offset


@dataclass(frozen=True)
class TransferTotals:
    count: int
    bytes_total: int
    per_day: dict[int, int] = field(default_factory=dict)  # day-start epoch -> bytes

    @property
    def mean_size(self) -> float:
        return self.bytes_total / self.count if self.count else 0.0


def transfer_totals(events: Iterable[TraceEvent]) -> TransferTotals:
    """Total bytes moved into the cache by Transfer events (plus a per-day map)."""
    count = 0
    bytes_total = 0
    per_day: dict[int, int] = defaultdict(int)
    for event in events:
        if isinstance(event, Transfer):
            count += 1
            bytes_total += event.size
            per_day[event.ts - event.ts % SECONDS_PER_DAY] += event.size
    return TransferTotals(count=count, bytes_total=bytes_total, per_day=dict(per_day))


# ---------------------------------------------------------------------------
# file lifetimes


@dataclass(frozen=True)
class LifetimeRecord:
    """One contiguous stretch of activity for a file.

    ``t_start`` is the first open of the group; ``t_end`` is the latest close
    at or after t_start and before the next group's first open (or end of
    trace). ``incomplete`` marks groups with no usable close, where t_end
    falls back to the group's last open.
    """

    path: str
    t_start: int
    t_end: int
    opens: int
    incomplete: bool = False

    @property
    def duration_seconds(self) -> int:
        return self.t_end - self.t_start

    @property
    def duration_hours(self) -> float:
        return self.duration_seconds / SECONDS_PER_HOUR


def _per_path_activity(events: Iterable[TraceEvent]) -> dict[str, tuple[list[int], list[int]]]:
    """path -> (sorted open timestamps, sorted close timestamps)."""
    opens: dict[str, list[int]] = defaultdict(list)
    closes: dict[str, list[int]] = defaultdict(list)
    for event in events:
        if isinstance(event, Open):
            opens[event.path].append(event.ts)
        elif isinstance(event, Close):
            closes[event.path].append(event.ts)
    return {
        path: (sorted(ts_list), sorted(closes.get(path, [])))
        for path, ts_list in opens.items()
    }


def segment_lifetimes(
    events: Iterable[TraceEvent],
    gap_threshold: int = DEFAULT_GAP_THRESHOLD_SECONDS,
) -> list[LifetimeRecord]:
    """Group each file's opens into lifetimes split at gaps > gap_threshold.

    Greedy left-to-right grouping on open timestamps: an open within the
    threshold of the previous open extends the current lifetime; a larger gap
    starts a new one. Closes for paths that were never opened are ignored
    (see close_anomalies). Records are sorted by (path, t_start).
    """
    if gap_threshold < 0:
        raise ValueError("gap_threshold must be non-negative")
    records: list[LifetimeRecord] = []
    for path, (open_ts, close_ts) in sorted(_per_path_activity(events).items()):
        groups: list[list[int]] = [[open_ts[0]]]
        for prev, cur in zip(open_ts, open_ts[1:]):
            if cur - prev > gap_threshold:
                groups.append([cur])
            else:
                groups[-1].append(cur)
        for index, group in enumerate(groups):
            window_end = groups[index + 1][0] if index + 1 < len(groups) else None
            eligible = [
                ts for ts in close_ts
                if ts >= group[0] and (window_end is None or ts < window_end)
            ]
            if eligible:
                records.append(LifetimeRecord(
                    path=path, t_start=group[0], t_end=max(eligible), opens=len(group)))
            else:
                records.append(LifetimeRecord(
                    path=path, t_start=group[0], t_end=group[-1],
                    opens=len(group), incomplete=True))
    return records


def close_anomalies(events: Iterable[TraceEvent]) -> int:
    """Closes with no live lifetime: before their path's first open, or pathless."""
    first_open: dict[str, int] = {}
    closes: list[Close] = []
    for event in events:
        if isinstance(event, Open):
            prior = first_open.get(event.path)
            if prior is None or event.ts < prior:
                first_open[event.path] = event.ts
        elif isinstance(event, Close):
            closes.append(event)
    return sum(
        1 for close in closes
        if close.path not in first_open or close.ts < first_open[close.path]
    )


@dataclass(frozen=True)
class SweepPoint:
    threshold_seconds: int
    lifetime_count: int
    mean_duration_hours: float
    median_duration_hours: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    grand_mean_hours: float  # mean of the per-threshold mean durations


def threshold_sweep(
    events: Iterable[TraceEvent],
    thresholds: Sequence[int],
) -> SweepResult:
    """Per-threshold lifetime summaries plus the mean of the per-τ means.

    The lifetime count is non-increasing in the threshold: raising it can
    only merge groups, never split them.
    """
    if not thresholds:
        raise ValueError("thresholds must be non-empty")
    materialized = [e for e in events if isinstance(e, (Open, Close))]
    points = []
    for threshold in thresholds:
        records = segment_lifetimes(materialized, gap_threshold=threshold)
        durations = [record.duration_hours for record in records]
        points.append(SweepPoint(
            threshold_seconds=int(threshold),
            lifetime_count=len(records),
            mean_duration_hours=float(np.mean(durations)) if durations else 0.0,
            median_duration_hours=float(np.median(durations)) if durations else 0.0,
        ))
    grand = float(np.mean([point.mean_duration_hours for point in points]))
    return SweepResult(points=tuple(points), grand_mean_hours=grand)


def lifetime_quantile_report(
    records: Sequence[LifetimeRecord],
    thresholds_hours: Sequence[float] = (1.0, 5.0, 10.0),
) -> list[float]:
    """Fraction of lifetimes strictly under each threshold (hours)."""
    if not records:
        raise ValueError("no lifetime records to report on")
    hours = np.array([record.duration_hours for record in records])
    return [float(np.mean(hours < float(t))) for t in thresholds_hours]


def lifetime_summary(records: Sequence[LifetimeRecord]) -> dict[str, float | int]:
    """Roll-up block for reports: count, mean/median hours, 1/5/10 h shares."""
    if not records:
        return {
            "count": 0, "incomplete": 0, "mean_hours": 0.0, "median_hours": 0.0,
            "fraction_under_1h": 0.0, "fraction_under_5h": 0.0,
            "fraction_under_10h": 0.0,
        }
    under_1h, under_5h, under_10h = lifetime_quantile_report(records)
    hours = np.array([record.duration_hours for record in records])
    return {
        "count": len(records),
        "incomplete": sum(1 for record in records if record.incomplete),
        "mean_hours": float(hours.mean()),
        "median_hours": float(np.median(hours)),
        "fraction_under_1h": under_1h,
        "fraction_under_5h": under_5h,
        "fraction_under_10h": under_10h,
    }


# ---------------------------------------------------------------------------
# histograms


@dataclass(frozen=True)
class Histogram:
    """Counts over explicit bin edges; bins are [lo, hi) except the last, [lo, hi]."""

    edges: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(
            (self.edges[i] + self.edges[i + 1]) / 2.0
            for i in range(len(self.counts))
        )

    @property
    def total(self) -> int:
        return sum(self.counts)


def build_histogram(samples: Sequence[float], edges: Sequence[float]) -> Histogram:
    """Bin samples into the given edges; out-of-range samples are dropped.

    Left-closed right-open bins, with the final bin closed on the right
    (numpy's convention).
    """
    edge_array = np.asarray(edges, dtype=float)
    if edge_array.ndim != 1 or edge_array.size < 2:
        raise ValueError("need at least two bin edges")
    if not np.all(np.diff(edge_array) > 0):
        raise ValueError("bin edges must be strictly increasing")
    counts, _ = np.histogram(np.asarray(samples, dtype=float), bins=edge_array)
    return Histogram(edges=tuple(float(e) for e in edge_array),
                     counts=tuple(int(c) for c in counts))


def uniform_edges(lo: float, hi: float, width: float) -> tuple[float, ...]:
    """Regular edges from lo to at least hi in steps of width."""
    if width <= 0:
        raise ValueError("width must be positive")
    if hi <= lo:
        raise ValueError("hi must exceed lo")
    n_bins = max(1, math.ceil((hi - lo) / width - 1e-9))
    return tuple(lo + width * i for i in range(n_bins + 1))


#: Default lifetime histogram bins: 1-hour bins spanning [0, 240] hours.
LIFETIME_EDGES_HOURS = uniform_edges(0.0, 240.0, 1.0)

#: Default read-count histogram bins: width 25 over [0, 2000].
READ_COUNT_EDGES = uniform_edges(0.0, 2000.0, 25.0)


# ---------------------------------------------------------------------------
# power-law fit


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of y = a * x**b + eps."""

    a: float
    b: float
    eps: float
    rmse: float
    converged: bool = True

    def predict(self, x):
        return self.a * np.asarray(x, dtype=float) ** self.b + self.eps

    def positive_root(self) -> float | None:
        """x where the fitted curve crosses zero, if it does."""
        if self.eps >= 0 or self.a <= 0 or self.b >= 0:
            return None
        return float((-self.eps / self.a) ** (1.0 / self.b))


def _initial_guess(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """eps starts at 0; (a, b) from log-log regression over the y > 0 points."""
    mask = y > 0
    if mask.sum() >= 2:
        slope, intercept = np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)
        return float(math.exp(intercept)), float(slope), 0.0
    return 1.0, -1.0, 0.0


def fit_power_law(
    x: Sequence[float],
    y: Sequence[float],
    initial: tuple[float, float, float] | None = None,
    max_iterations: int = 500,
) -> PowerLawFit:
    """Fit y = a * x**b + eps by unweighted nonlinear least squares.

    Points are sorted internally, so the result is exactly invariant to input
    permutation. Needs at least 3 points with 3 distinct, strictly positive
    x values. Non-convergence within the iteration budget returns the
    best-so-far parameters with converged=False.
    """
    pairs = sorted(zip((float(v) for v in x), (float(v) for v in y)))
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    if xs.size < 3:
        raise ValueError("need at least 3 points to fit 3 parameters")
    if np.any(xs <= 0):
        raise ValueError("x values must be strictly positive")
    if np.unique(xs).size < 3:
        raise ValueError("need at least 3 distinct x values")

    guess = initial if initial is not None else _initial_guess(xs, ys)

    def residuals(theta):
        a, b, eps = theta
        return a * xs**b + eps - ys

    solution = least_squares(residuals, guess, method="lm",
                             ftol=1e-10, xtol=1e-10, gtol=1e-10,
                             max_nfev=max_iterations * 4)
    a, b, eps = (float(v) for v in solution.x)
    rmse = float(np.sqrt(np.mean(solution.fun**2)))
    converged = solution.status > 0
    if not converged:
        logger.warning("power-law fit hit the iteration budget; returning best-so-far")
    logger.debug("power-law fit: a=%.6g b=%.6g eps=%.6g rmse=%.6g", a, b, eps, rmse)
    return PowerLawFit(a=a, b=b, eps=eps, rmse=rmse, converged=converged)


def fit_lifetime_histogram(
    records: Sequence[LifetimeRecord],
    edges_hours: Sequence[float] = LIFETIME_EDGES_HOURS,
) -> tuple[Histogram, PowerLawFit]:
    """Histogram lifetime durations (hours) and fit the power law to it.

    Zero-count bins stay in the histogram, but only bins with positive
    centers enter the fit (x must be positive).
    """
    hours = [record.duration_hours for record in records]
    hist = build_histogram(hours, edges_hours)
    centers = np.array(hist.centers)
    counts = np.array(hist.counts, dtype=float)
    usable = centers > 0
    fit = fit_power_law(centers[usable], counts[usable])
    return hist, fit
