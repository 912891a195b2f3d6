"""Cache simulation: trace-driven LRU plus a stochastic content model.

The LRU simulator replays a trace against a byte-capacity cache. Files enter
the cache only on Transfer events; Read/ReadV events score hits or misses
and refresh recency but never insert. The content model grows a synthetic
cache population step by step (no trace required); fill_time replays a
trace's transfers to time how long real traffic takes to fill a capacity.
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .events import Read, ReadV, TraceEvent, Transfer

logger = logging.getLogger(__name__)

OUTCOME_HIT = "hit"
OUTCOME_MISS = "miss"
OUTCOME_NEUTRAL = "neutral"


@dataclass(frozen=True)
class Applied:
    """What one event did to the cache.

    Transfers are neutral (they are not read operations); `inserted` and
    `bypassed` refine what a neutral application did.
    """

    outcome: str
    evicted: tuple[str, ...] = ()
    inserted: bool = False
    bypassed: bool = False


@dataclass
class CacheState:
    """Mutable byte-capacity LRU cache; insertion order tracks recency (MRU last)."""

    capacity: int
    entries: OrderedDict[str, int] = field(default_factory=OrderedDict)
    occupied: int = 0
    hits: int = 0
    misses: int = 0
    inserts: int = 0
    bypasses: int = 0
    eviction_events: int = 0
    bytes_inserted: int = 0
    bytes_evicted: int = 0

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")

    @property
    def resident(self) -> int:
        return len(self.entries)

    def _evict_until_fits(self) -> list[str]:
        evicted = []
        while self.occupied > self.capacity:
            victim, size = self.entries.popitem(last=False)
            self.occupied -= size
            self.bytes_evicted += size
            self.eviction_events += 1
            evicted.append(victim)
        return evicted

    def apply(self, event: TraceEvent) -> Applied:
        if isinstance(event, (Read, ReadV)):
            path = event.path
            if path is not None and path in self.entries:
                self.hits += 1
                self.entries.move_to_end(path)
                return Applied(OUTCOME_HIT)
            # unresolved readV (path None) scores a miss like any absent file
            self.misses += 1
            return Applied(OUTCOME_MISS)

        if isinstance(event, Transfer):
            if event.size > self.capacity:
                # can never fit; drop any stale residency under the same path
                if event.path in self.entries:
                    stale = self.entries.pop(event.path)
                    self.occupied -= stale
                    self.bytes_evicted += stale
                    self.eviction_events += 1
                self.bypasses += 1
                logger.warning("transfer of %d bytes exceeds capacity %d; bypassing (%s)",
                               event.size, self.capacity, event.path)
                return Applied(OUTCOME_NEUTRAL, bypassed=True)
            if event.path in self.entries:
                # replacement: the old bytes leave, the new bytes land MRU;
                # not counted as an eviction event
                old = self.entries.pop(event.path)
                self.occupied -= old
                self.bytes_evicted += old
            self.entries[event.path] = event.size
            self.occupied += event.size
            self.inserts += 1
            self.bytes_inserted += event.size
            displaced = self._evict_until_fits()
            return Applied(OUTCOME_NEUTRAL, evicted=tuple(displaced), inserted=True)

        return Applied(OUTCOME_NEUTRAL)


def apply_event(state: CacheState, event: TraceEvent) -> Applied:
    """Mutate `state` with one event and describe what happened."""
    return state.apply(event)


@dataclass(frozen=True)
class SimResult:
    capacity: int
    hits: int
    misses: int
    total_reads: int
    inserts: int
    bypasses: int
    eviction_events: int
    bytes_inserted: int
    bytes_evicted: int
    final_occupied: int
    final_resident: int

    @property
    def hit_rate(self) -> float | None:
        """hits / total_reads; absent (None) when the stream had no reads."""
        if self.total_reads == 0:
            return None
        return self.hits / self.total_reads


def simulate_lru(events: Iterable[TraceEvent], capacity: int) -> SimResult:
    """Replay events through an LRU cache of `capacity` bytes."""
    state = CacheState(capacity=capacity)
    for event in events:
        state.apply(event)
        assert state.occupied <= state.capacity, "capacity invariant violated"
    result = SimResult(
        capacity=capacity,
        hits=state.hits,
        misses=state.misses,
        total_reads=state.hits + state.misses,
        inserts=state.inserts,
        bypasses=state.bypasses,
        eviction_events=state.eviction_events,
        bytes_inserted=state.bytes_inserted,
        bytes_evicted=state.bytes_evicted,
        final_occupied=state.occupied,
        final_resident=state.resident,
    )
    logger.debug("lru capacity=%d hit_rate=%s inserts=%d evictions=%d",
                 capacity, result.hit_rate, result.inserts, result.eviction_events)
    return result


def oracle_lru(events: Sequence[TraceEvent], capacity: int) -> SimResult:
    """Independent reference LRU using a plain list scanned front-to-back.

    Deliberately naive (linear scans, occupancy recomputed by summation) so
    it shares no code with CacheState; used to cross-check the fast
    implementation in tests.
    """
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    stack: list[tuple[str, int]] = []  # LRU first, MRU last
    hits = misses = inserts = bypasses = evictions = 0
    bytes_in = bytes_out = 0
    for event in events:
        if isinstance(event, (Read, ReadV)):
            found = None
            for i, (path, _) in enumerate(stack):
                if event.path is not None and path == event.path:
                    found = i
                    break
            if found is None:
                misses += 1
            else:
                hits += 1
                stack.append(stack.pop(found))
        elif isinstance(event, Transfer):
            existing = [i for i, (path, _) in enumerate(stack) if path == event.path]
            if event.size > capacity:
                if existing:
                    _, old = stack.pop(existing[0])
                    bytes_out += old
                    evictions += 1
                bypasses += 1
                continue
            if existing:
                _, old = stack.pop(existing[0])
                bytes_out += old
            stack.append((event.path, event.size))
            inserts += 1
            bytes_in += event.size
            while sum(size for _, size in stack) > capacity:
                _, old = stack.pop(0)
                bytes_out += old
                evictions += 1
    occupied = sum(size for _, size in stack)
    return SimResult(
        capacity=capacity, hits=hits, misses=misses, total_reads=hits + misses,
        inserts=inserts, bypasses=bypasses, eviction_events=evictions,
        bytes_inserted=bytes_in, bytes_evicted=bytes_out,
        final_occupied=occupied, final_resident=len(stack),
    )


def hit_rate_sweep(
    events: Sequence[TraceEvent],
    capacities: Sequence[int],
) -> list[SimResult]:
    """simulate_lru at each capacity; capacities evaluated independently."""
    materialized = list(events)
    return [simulate_lru(materialized, capacity) for capacity in capacities]


def fill_time(
    events: Iterable[TraceEvent],
    capacities: Sequence[int],
) -> list[tuple[int, int | None]]:
    """Seconds from the first event until transfers fill each capacity.

    Replays Transfer events into an initially empty cache (replacement
    semantics for repeated paths, nothing evicted before the fill point) and
    records, per capacity, the timestamp of the transfer at which occupied
    bytes first reach it. Returns (capacity, duration_seconds | None); None
    means the trace never filled that capacity. Larger capacities never fill
    earlier, since every capacity sees the same occupancy trajectory.
    """
    targets = sorted(set(int(c) for c in capacities))
    if any(c <= 0 for c in targets):
        raise ValueError("capacities must be positive")
    fill_ts: dict[int, int] = {}
    sizes: dict[str, int] = {}
    occupied = 0
    t0: int | None = None
    pending = list(targets)  # ascending; pop from the front as they fill
    for event in events:
        if t0 is None:
            t0 = event.ts
        if not isinstance(event, Transfer):
            continue
        old = sizes.get(event.path)
        if old is not None:
            occupied -= old
        sizes[event.path] = event.size
        occupied += event.size
        while pending and occupied >= pending[0]:
            fill_ts[pending[0]] = event.ts
            pending.pop(0)
        if not pending:
            break
    base = t0 if t0 is not None else 0
    return [(c, fill_ts[c] - base if c in fill_ts else None) for c in targets]


# ---------------------------------------------------------------------------
# stochastic content model


def as_fraction(value) -> Fraction:
    """Decimal-faithful Fraction: 0.1 becomes 1/10, not the binary float."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    return Fraction(Decimal(str(value)))


@dataclass(frozen=True)
class ContentModelParams:
    """Knobs for the stepwise cache-population growth model.

    Each step draws r_t from rate_params and s_t from size_params (uniform
    choices with the seeded generator) and adds
    ``(access_rate * r_t) * (1 - h) * (file_size * s_t)`` bytes; h then ramps
    from ``h0`` by ``delta`` while below ``h_cap``. Cache bytes clamp to
    ``capacity`` (overflow accrues as evicted bytes) and floor at zero. All
    arithmetic is exact rational, so byte counts reproduce to the last digit.
    One step models one day.
    """

    access_rate: int = 7000
    file_size: int = 200_000_000
    h0: Fraction = Fraction(1, 10)
    h_cap: Fraction = Fraction(6, 10)
    delta: Fraction | None = None  # default: (h_cap - h0) / 30
    rate_params: tuple[Fraction, ...] = (Fraction(1),)
    size_params: tuple[Fraction, ...] = (Fraction(1),)
    seed: int = 0
    steps: int = 60
    capacity: int | None = None
    clamp_negative_val: bool = False

    def normalized(self) -> "ContentModelParams":
        h0 = as_fraction(self.h0)
        cap = as_fraction(self.h_cap)
        delta = as_fraction(self.delta) if self.delta is not None else (cap - h0) / 30
        return replace(
            self,
            h0=h0,
            h_cap=cap,
            delta=delta,
            rate_params=tuple(as_fraction(v) for v in self.rate_params),
            size_params=tuple(as_fraction(v) for v in self.size_params),
        )

    def validate(self) -> None:
        p = self.normalized()
        if p.access_rate <= 0 or p.file_size <= 0:
            raise ValueError("access_rate and file_size must be positive")
        if not (0 <= p.h0 <= p.h_cap <= 1):
            raise ValueError("need 0 <= h0 <= h_cap <= 1")
        if p.delta < 0:
            raise ValueError("delta must be non-negative")
        if not p.rate_params or not p.size_params:
            raise ValueError("scalar pools must be non-empty")
        for v in (*p.rate_params, *p.size_params):
            if not (Fraction(-2) <= v <= Fraction(2)):
                raise ValueError("scalar parameters must lie in [-2.0, 2.0]")
        if p.steps < 1:
            raise ValueError("steps must be at least 1")
        if p.capacity is not None and p.capacity <= 0:
            raise ValueError("capacity must be positive when given")


def default_scalars(
    n: int,
    seed: int,
    low: float = 0.4,
    high: float = 2.0,
    digits: int = 3,
) -> tuple[Fraction, ...]:
    """Deterministic scalar pool: uniform [low, high) rounded to `digits`.

    Values are rounded to short decimals and converted exactly, keeping the
    rational arithmetic cheap. The positive-mean default range (a sub-range
    of the allowed [-2, 2]) makes typical steps grow the cache, so capacities
    actually fill; a symmetric pool would hover around zero growth.
    """
    rng = np.random.default_rng(seed)
    draws = np.round(rng.uniform(low, high, n), digits)
    return tuple(as_fraction(float(v)) for v in draws)


#: Seed chosen so default_params() fills 40 TB in ~30 daily steps.
DEFAULT_CONTENT_SEED = 13


def default_params(
    capacity: int | None = 40_000_000_000_000,
    steps: int = 60,
    seed: int = DEFAULT_CONTENT_SEED,
) -> ContentModelParams:
    """Calibrated defaults: 40 TB capacity fills after roughly 30 daily steps."""
    return ContentModelParams(
        rate_params=default_scalars(16, seed=seed * 2 + 1),
        size_params=default_scalars(16, seed=seed * 2 + 2),
        seed=seed,
        steps=steps,
        capacity=capacity,
    )


@dataclass(frozen=True)
class ContentStep:
    step: int
    val: Fraction
    cache_bytes: Fraction
    evicted_bytes: Fraction
    h: Fraction


def content_model(params: ContentModelParams) -> list[ContentStep]:
    """Run the growth model for params.steps steps.

    Per step: draw r_t and s_t, compute val with the current h, then ramp h.
    cache_bytes accumulates val, clamped to [0, capacity]; bytes pushed past
    capacity accumulate as evicted_bytes.
    """
    params.validate()
    p = params.normalized()
    rng = np.random.default_rng(p.seed)

    h = p.h0
    cache = Fraction(0)
    evicted = Fraction(0)
    cap = Fraction(p.capacity) if p.capacity is not None else None
    out: list[ContentStep] = []
    for step in range(1, p.steps + 1):
        r_t = p.rate_params[int(rng.integers(len(p.rate_params)))]
        s_t = p.size_params[int(rng.integers(len(p.size_params)))]
        val = (p.access_rate * r_t) * (1 - h) * (p.file_size * s_t)
        if p.clamp_negative_val and val < 0:
            val = Fraction(0)
        cache += val
        if cap is not None and cache > cap:
            evicted += cache - cap
            cache = cap
        if cache < 0:
            cache = Fraction(0)
        out.append(ContentStep(step=step, val=val, cache_bytes=cache,
                               evicted_bytes=evicted, h=h))
        if h < p.h_cap:
            h = h + p.delta
    return out


def fill_step(params: ContentModelParams) -> int | None:
    """First step at which cache_bytes reaches params.capacity, or None."""
    if params.capacity is None:
        raise ValueError("fill_step needs params.capacity")
    cap = Fraction(params.capacity)
    for record in content_model(params):
        if record.cache_bytes >= cap:
            return record.step
    return None


def constant_rate_fill_steps(params: ContentModelParams) -> int:
    """Closed-form fill step for delta == 0 and singleton unit scalar pools.

    Only valid in that regime (each step adds the same positive amount);
    used as an oracle in tests.
    """
    p = params.normalized()
    if p.delta != 0:
        raise ValueError("closed form requires delta == 0")
    if p.rate_params != (Fraction(1),) or p.size_params != (Fraction(1),):
        raise ValueError("closed form requires unit scalar pools")
    if p.capacity is None:
        raise ValueError("closed form needs a capacity")
    per_step = p.access_rate * (1 - p.h0) * p.file_size
    if per_step <= 0:
        raise ValueError("model never grows")
    return math.ceil(Fraction(p.capacity) / per_step)
