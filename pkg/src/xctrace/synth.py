"""Deterministic generator of synthetic XRootD-style daily log corpora.

Every statistical knob lives on :class:`WorkloadProfile`; the defaults are
calibrated so large corpora land on realistic aggregates (200 MB mean file
size, 154,632 B mean read size, 1.52 GB mean read offset, per-file monthly
read counts peaking near 25 and 150 with a heavy tail pulling the mean up to
1562.46, power-law lifetime lengths). Generated lines use the exact grammar
the parser understands, so a corpus round-trips back into the ground-truth
event list the generator returns.
"""

from __future__ import annotations

import datetime as dt
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .events import (
    SECONDS_PER_DAY,
    Close,
    Open,
    Read,
    ReadV,
    SessionKey,
    TraceEvent,
    Transfer,
    day_of,
    day_start,
    format_timestamp,
    kind_of,
)

logger = logging.getLogger(__name__)

#: Gap threshold (days) that downstream lifetime segmentation defaults to;
#: generated inter-lifetime gaps must stay strictly above it.
LIFETIME_GAP_THRESHOLD_DAYS = 1.2

_JUNK_LINES = (
    "cache heartbeat ok",
    "xrd stats poll complete",
    "purge thread idle",
    "connection pool size 8",
)


class InvalidProfile(ValueError):
    """A WorkloadProfile field violates its invariants."""


@dataclass(frozen=True)
class Lognormal:
    """Lognormal sampler parameterized by its arithmetic mean and log-space sigma."""

    mean: float
    sigma: float = 1.0

    @property
    def mu(self) -> float:
        return math.log(self.mean) - 0.5 * self.sigma**2

    def sample(self, rng: np.random.Generator, n: int | None = None):
        return rng.lognormal(self.mu, self.sigma, n)

    def check(self, label: str) -> None:
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise InvalidProfile(f"{label}: mean must be finite and positive")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidProfile(f"{label}: sigma must be finite and positive")


@dataclass(frozen=True)
class ReadCountMixture:
    """Per-file monthly read-operation counts.

    Two lognormal bulk components with modes at ``mode_a`` and ``mode_b``,
    plus a Pareto tail whose scale is solved so the mixture mean equals
    ``mean_total``. The tail has infinite variance by design: sample means
    over small populations wander, exactly like the real monthly spread.
    """

    mode_a: float = 25.0
    mode_b: float = 150.0
    sigma: float = 0.6
    weight_a: float = 0.45
    weight_b: float = 0.45
    tail_alpha: float = 1.5
    mean_total: float = 1562.46

    @property
    def tail_weight(self) -> float:
        return 1.0 - self.weight_a - self.weight_b

    def _component_mean(self, mode: float) -> float:
        # lognormal: mode = exp(mu - sigma^2), mean = exp(mu + sigma^2 / 2)
        return mode * math.exp(1.5 * self.sigma**2)

    @property
    def tail_scale(self) -> float:
        bulk = self.weight_a * self._component_mean(self.mode_a)
        bulk += self.weight_b * self._component_mean(self.mode_b)
        tail_mean = (self.mean_total - bulk) / self.tail_weight
        return tail_mean * (self.tail_alpha - 1.0) / self.tail_alpha

    def sample(self, rng: np.random.Generator) -> int:
        u = rng.random()
        if u < self.weight_a:
            mu = math.log(self.mode_a) + self.sigma**2
            value = rng.lognormal(mu, self.sigma)
        elif u < self.weight_a + self.weight_b:
            mu = math.log(self.mode_b) + self.sigma**2
            value = rng.lognormal(mu, self.sigma)
        else:
            value = (1.0 + rng.pareto(self.tail_alpha)) * self.tail_scale
        return max(1, round(value))

    def check(self, label: str) -> None:
        for name, v in (("mode_a", self.mode_a), ("mode_b", self.mode_b),
                        ("sigma", self.sigma), ("mean_total", self.mean_total)):
            if not (math.isfinite(v) and v > 0):
                raise InvalidProfile(f"{label}.{name}: must be finite and positive")
        if not (0.0 <= self.weight_a <= 1.0 and 0.0 <= self.weight_b <= 1.0):
            raise InvalidProfile(f"{label}: component weights must lie in [0, 1]")
        if self.tail_weight <= 0.0:
            raise InvalidProfile(f"{label}: component weights leave no tail mass")
        if self.tail_alpha <= 1.0:
            raise InvalidProfile(f"{label}: tail_alpha must exceed 1 for a finite mean")
        if self.tail_scale <= 0.0:
            raise InvalidProfile(f"{label}: mean_total is below the bulk components' mean")


@dataclass(frozen=True)
class BoundedPowerLaw:
    """Sampler over [x_min, x_limit] with density proportional to a*x**b + eps.

    With a negative ``eps`` the raw curve crosses zero at
    (-eps/a)**(1/b); the density is truncated there. ``b < -1`` makes the
    curve non-integrable at 0, hence the strictly positive ``x_min``.
    Sampling inverts the exact normalized antiderivative on a dense grid.
    """

    a: float = 15227.387
    b: float = -1.031
    eps: float = -995.488
    x_min: float = 0.1
    x_max: float | None = None
    grid_points: int = 4096

    @property
    def x_limit(self) -> float:
        if self.eps < 0:
            root = (-self.eps / self.a) ** (1.0 / self.b)
            return min(root, self.x_max) if self.x_max is not None else root
        if self.x_max is None:
            raise InvalidProfile("power law with eps >= 0 needs an explicit x_max")
        return self.x_max

    def density(self, x):
        return self.a * np.asarray(x, dtype=float) ** self.b + self.eps

    def _antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.a * x ** (self.b + 1.0) / (self.b + 1.0) + self.eps * x

    def _grid(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.x_min, self.x_limit, self.grid_points)
        cdf = self._antiderivative(xs) - self._antiderivative(self.x_min)
        cdf /= cdf[-1]
        return xs, cdf

    def sample(self, rng: np.random.Generator, n: int | None = None):
        xs, cdf = self._grid()
        return np.interp(rng.random(n), cdf, xs)

    def mean(self) -> float:
        """Analytic mean of the truncated density."""
        lo, hi = self.x_min, self.x_limit

        def first_moment(x):
            return self.a * x ** (self.b + 2.0) / (self.b + 2.0) + self.eps * x**2 / 2.0

        mass = self._antiderivative(hi) - self._antiderivative(lo)
        return float((first_moment(hi) - first_moment(lo)) / mass)

    def check(self, label: str) -> None:
        for name, v in (("a", self.a), ("b", self.b), ("eps", self.eps), ("x_min", self.x_min)):
            if not math.isfinite(v):
                raise InvalidProfile(f"{label}.{name}: must be finite")
        if self.a <= 0 or self.b >= 0:
            raise InvalidProfile(f"{label}: expects a > 0 and b < 0")
        if self.x_min <= 0:
            raise InvalidProfile(f"{label}: x_min must be positive")
        if self.x_limit <= self.x_min:
            raise InvalidProfile(f"{label}: empty support")


@dataclass(frozen=True)
class MinimumPlusExponential:
    """Shifted exponential: minimum_days + Exp(scale_days)."""

    minimum_days: float = 1.5
    scale_days: float = 2.0

    def sample(self, rng: np.random.Generator) -> float:
        return self.minimum_days + rng.exponential(self.scale_days)

    def check(self, label: str) -> None:
        if not (math.isfinite(self.minimum_days) and math.isfinite(self.scale_days)):
            raise InvalidProfile(f"{label}: parameters must be finite")
        if self.minimum_days <= LIFETIME_GAP_THRESHOLD_DAYS:
            raise InvalidProfile(
                f"{label}: minimum gap must exceed {LIFETIME_GAP_THRESHOLD_DAYS} days "
                "so lifetimes stay recoverable"
            )
        if self.scale_days < 0:
            raise InvalidProfile(f"{label}: scale_days must be non-negative")


@dataclass(frozen=True)
class WorkloadProfile:
    """Parameterization of the synthetic log generator."""

    file_population: int = 200
    file_size_distribution: Lognormal = field(
        default_factory=lambda: Lognormal(mean=200_000_000.0, sigma=0.5))
    read_count_mixture: ReadCountMixture = field(default_factory=ReadCountMixture)
    read_size_distribution: Lognormal = field(
        default_factory=lambda: Lognormal(mean=154_632.0, sigma=1.0))
    offset_distribution: Lognormal = field(
        default_factory=lambda: Lognormal(mean=1.52e9, sigma=1.0))
    lifetime_distribution: BoundedPowerLaw = field(default_factory=BoundedPowerLaw)
    inter_lifetime_gap: MinimumPlusExponential = field(default_factory=MinimumPlusExponential)
    readv_fraction: float = 0.3
    sessions_per_day: int = 1
    readv_chunks_max: int = 4
    junk_line_rate: float = 0.0
    orphan_readv_rate: float = 0.0
    user_pool: int = 8

    def validate(self) -> None:
        if self.file_population < 1:
            raise InvalidProfile("file_population must be at least 1")
        for name in ("readv_fraction", "junk_line_rate", "orphan_readv_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidProfile(f"{name} must lie in [0, 1]")
        if self.sessions_per_day < 1:
            raise InvalidProfile("sessions_per_day must be at least 1")
        if self.readv_chunks_max < 1:
            raise InvalidProfile("readv_chunks_max must be at least 1")
        if self.user_pool < 1:
            raise InvalidProfile("user_pool must be at least 1")
        self.file_size_distribution.check("file_size_distribution")
        self.read_count_mixture.check("read_count_mixture")
        self.read_size_distribution.check("read_size_distribution")
        self.offset_distribution.check("offset_distribution")
        self.lifetime_distribution.check("lifetime_distribution")
        self.inter_lifetime_gap.check("inter_lifetime_gap")


def default_profile() -> WorkloadProfile:
    """The calibrated default profile; pure and constant."""
    return WorkloadProfile()


def format_open(ts: int, session: SessionKey, path: str) -> str:
    return (f"{format_timestamp(ts)} tid={session.thread_id} "
            f"uid={session.user_id} ofs open r {path}")


def format_close(ts: int, session: SessionKey, path: str, score: float) -> str:
    return (f"{format_timestamp(ts)} tid={session.thread_id} "
            f"uid={session.user_id} cache prefetch score = {score:.3f} {path}")


def format_read(ts: int, session: SessionKey, path: str, size: int, offset: int) -> str:
    return (f"{format_timestamp(ts)} tid={session.thread_id} "
            f"uid={session.user_id} req=read {size}@{offset} fn={path}")


def format_readv(ts: int, session: SessionKey, chunks: Iterable[tuple[int, int]]) -> str:
    pairs = " ".join(f"{size}@{offset}" for size, offset in chunks)
    return (f"{format_timestamp(ts)} tid={session.thread_id} "
            f"uid={session.user_id} fh=0 readV {pairs}")


def format_transfer(ts: int, path: str, size: int) -> str:
    return f"{format_timestamp(ts)} cache successfuly read size from info file = {size} {path}"


def _day_windows(t_s: int, t_e: int, sessions_per_day: int) -> list[tuple[int, int]]:
    """Split one lifetime into per-day (and per-session) activity windows.

    Consecutive window starts are at most one day apart, which keeps the
    whole lifetime recoverable under any gap threshold above one day.
    """
    windows = []
    pos = t_s
    while pos <= t_e:
        this_day_end = day_start(day_of(pos)) + SECONDS_PER_DAY - 1
        w_end = min(this_day_end, t_e)
        span = w_end - pos
        parts = sessions_per_day if span >= sessions_per_day else 1
        bounds = [pos + span * k // parts for k in range(parts)] + [w_end]
        for k in range(parts):
            sub_start = bounds[k] if k == 0 else bounds[k] + 1
            windows.append((min(sub_start, w_end), bounds[k + 1]))
        pos = this_day_end + 1
    return windows


def generate(
    profile: WorkloadProfile,
    seed: int,
    day_range: tuple[dt.date, dt.date],
    out_dir: str | Path,
) -> tuple[list[TraceEvent], list[Path]]:
    """Write one log file per calendar day and return the exact event list.

    Identical (profile, seed, day_range) produce byte-identical files. The
    returned ground truth is ordered exactly as a parse of the written files
    (in filename order) will emit it.
    """
    profile.validate()
    start_day, end_day = day_range
    if end_day < start_day:
        raise ValueError("day range is empty")
    n_days = (end_day - start_day).days + 1
    range_start = day_start(start_day)
    range_end = range_start + n_days * SECONDS_PER_DAY  # exclusive
    range_seconds = range_end - range_start
    count_scale = n_days / 30.0

    rng = np.random.default_rng(seed)
    tid_counter = itertools.count(1)
    seq_counter = itertools.count()
    # Per-day entries: (ts, seq, line, event-or-None); junk lines carry no event.
    day_entries: list[list[tuple[int, int, str, TraceEvent | None]]] = [[] for _ in range(n_days)]

    def emit(ts: int, line: str, event: TraceEvent | None) -> None:
        day_index = (ts - range_start) // SECONDS_PER_DAY
        day_entries[day_index].append((ts, next(seq_counter), line, event))

    def new_session() -> SessionKey:
        uid = f"u{int(rng.integers(profile.user_pool)):02d}"
        return SessionKey(f"t{next(tid_counter)}", uid)

    def sample_pair() -> tuple[int, int]:
        size = max(0, round(float(profile.read_size_distribution.sample(rng))))
        offset = max(0, round(float(profile.offset_distribution.sample(rng))))
        return size, offset

    for file_index in range(profile.file_population):
        path = f"/store/sim/f{file_index:06d}.root"
        file_size = max(1, round(float(profile.file_size_distribution.sample(rng))))
        target_reads = int(round(profile.read_count_mixture.sample(rng) * count_scale))

        lifetimes: list[tuple[int, int]] = []
        t_s = range_start + int(rng.uniform(0.0, range_seconds))
        while t_s < range_end:
            span = max(1, int(float(profile.lifetime_distribution.sample(rng)) * 3600.0))
            t_e = min(t_s + span, range_end - 1)
            lifetimes.append((t_s, t_e))
            gap = int(profile.inter_lifetime_gap.sample(rng) * SECONDS_PER_DAY)
            t_s = t_s + span + gap

        windows: list[tuple[int, int, bool]] = []  # (w_start, w_end, first_of_lifetime)
        for t_s, t_e in lifetimes:
            for w_index, (w_start, w_end) in enumerate(_day_windows(t_s, t_e, profile.sessions_per_day)):
                windows.append((w_start, w_end, w_index == 0))

        durations = np.array([w_end - w_start + 1 for w_start, w_end, _ in windows], dtype=float)
        if target_reads > 0 and len(windows) > 0:
            counts = rng.multinomial(target_reads, durations / durations.sum())
        else:
            counts = np.zeros(len(windows), dtype=int)

        for (w_start, w_end, first), n_reads in zip(windows, counts):
            if first:
                emit(w_start, format_transfer(w_start, path, file_size),
                     Transfer(w_start, path, file_size))
            session = new_session()
            emit(w_start, format_open(w_start, session, path), Open(w_start, session, path))
            times = np.sort(rng.integers(w_start, w_end + 1, size=int(n_reads)))
            for ts in (int(t) for t in times):
                if rng.random() < profile.readv_fraction:
                    n_chunks = int(rng.integers(1, profile.readv_chunks_max + 1))
                    chunks = tuple(sample_pair() for _ in range(n_chunks))
                    if profile.orphan_readv_rate > 0 and rng.random() < profile.orphan_readv_rate:
                        orphan = new_session()
                        emit(ts, format_readv(ts, orphan, chunks),
                             ReadV(ts, orphan, chunks, path=None))
                    else:
                        emit(ts, format_readv(ts, session, chunks),
                             ReadV(ts, session, chunks, path=path))
                else:
                    size, offset = sample_pair()
                    emit(ts, format_read(ts, session, path, size, offset),
                         Read(ts, session, path, size, offset))
            score = float(rng.uniform())
            emit(w_end, format_close(w_end, session, path, score),
                 Close(w_end, session, path))

    if profile.junk_line_rate > 0:
        for day_index in range(n_days):
            n_junk = int(rng.binomial(max(1, len(day_entries[day_index])), profile.junk_line_rate))
            base = range_start + day_index * SECONDS_PER_DAY
            for _ in range(n_junk):
                ts = base + int(rng.integers(SECONDS_PER_DAY))
                text = _JUNK_LINES[int(rng.integers(len(_JUNK_LINES)))]
                emit(ts, f"{format_timestamp(ts)} {text}", None)

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    ground_truth: list[TraceEvent] = []
    written: list[Path] = []
    for day_index in range(n_days):
        day = start_day + dt.timedelta(days=day_index)
        entries = sorted(day_entries[day_index], key=lambda entry: (entry[0], entry[1]))
        target = out_path / f"xrootd-{day.strftime('%Y%m%d')}.log"
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            for _, _, line, event in entries:
                handle.write(line + "\n")
                if event is not None:
                    ground_truth.append(event)
        written.append(target)

    logger.info("generated %d events across %d daily logs in %s",
                len(ground_truth), n_days, out_path)
    return ground_truth, written


def event_record(event: TraceEvent) -> dict:
    """JSON-friendly dict for one event (ground-truth export)."""
    record: dict = {"kind": kind_of(event), "ts": event.ts}
    if isinstance(event, Transfer):
        record.update(path=event.path, size=event.size)
        return record
    record.update(tid=event.session.thread_id, uid=event.session.user_id)
    if isinstance(event, (Open, Close)):
        record.update(path=event.path)
    elif isinstance(event, Read):
        record.update(path=event.path, size=event.size, offset=event.offset)
    else:
        record.update(path=event.path, chunks=[list(chunk) for chunk in event.chunks])
    return record
