"""Stats-engine tests: counts, lifetimes, sweeps, histograms, quantiles."""

import random

import pytest

from xctrace import stats
from xctrace.events import Close, Open, Read, ReadV, SessionKey, Transfer
from trace_utils import brute_force_lifetimes, random_trace, session_schedule

S = SessionKey("1", "u")
HOUR = 3600
DAY = 86400


def _read(ts, path, size=100, offset=0):
    return Read(ts=ts, session=S, path=path, size=size, offset=offset)


def _readv(ts, path, chunks=((100, 0),)):
    return ReadV(ts=ts, session=S, chunks=tuple(chunks), path=path)


def _open(ts, path):
    return Open(ts=ts, session=S, path=path)


def _close(ts, path):
    return Close(ts=ts, session=S, path=path)


# ------------------------------------------------------------- read counting


def test_count_reads_trivial_example():
    events = [_read(1, "/A"), _read(2, "/A"), _read(3, "/A"), _readv(4, "/B")]
    result = stats.count_reads_per_file(events)
    assert result.per_file_counts == {"/A": 3, "/B": 1}
    assert result.mean_reads_per_file == 2.0
    assert result.total_read_ops == 4


def test_count_reads_empty_stream():
    result = stats.count_reads_per_file([])
    assert result.per_file_counts == {}
    assert result.mean_reads_per_file is None
    assert result.total_read_ops == 0


def test_readv_counts_once_regardless_of_chunks():
    events = [_readv(1, "/A", chunks=((10, 0), (20, 5), (30, 7)))]
    result = stats.count_reads_per_file(events)
    assert result.per_file_counts == {"/A": 1}
    assert result.total_read_ops == 1
    assert result.size_samples == 3  # but every chunk is a size sample
    assert result.total_bytes_read == 60


def test_unresolved_readv_goes_to_reserved_bucket():
    events = [_read(1, "/A"), ReadV(ts=2, session=S, chunks=((5, 0),), path=None)]
    result = stats.count_reads_per_file(events)
    assert result.per_file_counts["/A"] == 1
    assert result.per_file_counts[stats.UNRESOLVED_KEY] == 1
    assert result.total_read_ops == 2
    assert result.distinct_files == 1  # reserved bucket not a file
    # Mean counts every read op (unresolved bucket included) over distinct real files.
    assert result.mean_reads_per_file == 2.0
    assert sum(result.per_file_counts.values()) == result.total_read_ops


def test_count_reads_matches_brute_force_on_random_stream():
    rng = random.Random(123)
    events = random_trace(rng, 1000)
    result = stats.count_reads_per_file(events)
    expected = {}
    ops = 0
    for event in events:
        if isinstance(event, (Read, ReadV)):
            key = event.path if event.path is not None else stats.UNRESOLVED_KEY
            expected[key] = expected.get(key, 0) + 1
            ops += 1
    assert result.per_file_counts == expected
    assert result.total_read_ops == ops


def test_read_size_stats_trivial_examples():
    total, mean_size, mean_offset = stats.read_size_stats(
        [_read(1, "/A", 100, 0), _read(2, "/A", 300, 50)])
    assert (total, mean_size, mean_offset) == (400, 200.0, 25.0)

    total, mean_size, mean_offset = stats.read_size_stats([_read(1, "/A", 0, 0)])
    assert (total, mean_size, mean_offset) == (0, 0.0, 0.0)


def test_read_stats_merge_equals_whole():
    rng = random.Random(99)
    for _ in range(20):
        events = random_trace(rng, rng.randrange(50, 400))
        cut = rng.randrange(len(events) + 1)
        whole = stats.count_reads_per_file(events)
        left = stats.count_reads_per_file(events[:cut])
        right = stats.count_reads_per_file(events[cut:])
        merged = left.merge(right)
        assert merged.per_file_counts == whole.per_file_counts
        assert merged.total_read_ops == whole.total_read_ops
        assert merged.total_bytes_read == whole.total_bytes_read
        assert merged.size_samples == whole.size_samples
        assert merged.total_offset == whole.total_offset


# ----------------------------------------------------------------- transfers


def test_transfer_totals():
    gig = 1_000_000_000
    events = [Transfer(ts=10, path="/A", size=gig), Transfer(ts=20, path="/B", size=gig)]
    totals = stats.transfer_totals(events)
    assert totals.count == 2
    assert totals.bytes_total == 2 * gig
    assert stats.transfer_totals([]).bytes_total == 0


# ----------------------------------------------------------------- lifetimes


def test_segment_lifetimes_within_threshold_is_one_record():
    events = [_open(0, "/A"), _open(DAY, "/A"), _close(int(1.05 * DAY), "/A")]
    records = stats.segment_lifetimes(events)
    assert len(records) == 1
    record = records[0]
    assert record.t_start == 0
    assert record.t_end == int(1.05 * DAY)
    assert record.opens == 2
    assert not record.incomplete


def test_segment_lifetimes_gap_splits():
    events = [_open(0, "/A"), _open(3 * DAY, "/A")]
    records = stats.segment_lifetimes(events)
    assert len(records) == 2
    assert all(r.incomplete for r in records)
    assert records[0].t_end == 0  # falls back to last open of the group


def test_close_before_next_lifetime_is_attached():
    events = [
        _open(0, "/A"),
        _close(2 * HOUR, "/A"),
        _open(3 * DAY, "/A"),
        _close(3 * DAY + HOUR, "/A"),
    ]
    records = stats.segment_lifetimes(events)
    assert [(r.t_start, r.t_end) for r in records] == [(0, 2 * HOUR), (3 * DAY, 3 * DAY + HOUR)]


def test_segment_lifetimes_matches_quadratic_oracle():
    rng = random.Random(31)
    for _ in range(60):
        events = session_schedule(rng, rng.randrange(5, 80))
        tau = rng.choice([int(0.5 * DAY), int(1.2 * DAY), 5 * DAY, 10 * DAY])
        fast = stats.segment_lifetimes(events, tau)
        slow = brute_force_lifetimes(events, tau)
        assert fast == slow


def test_lifetime_records_respect_gap_invariant():
    rng = random.Random(77)
    events = session_schedule(rng, 200)
    tau = int(1.2 * DAY)
    records = stats.segment_lifetimes(events, tau)
    by_path = {}
    for record in records:
        assert record.t_end >= record.t_start
        by_path.setdefault(record.path, []).append(record)
    for path_records in by_path.values():
        for earlier, later in zip(path_records, path_records[1:]):
            assert later.t_start - earlier.t_start > tau or later.t_start > earlier.t_end


def test_close_anomalies_counts_unmatched_closes():
    events = [_close(5, "/A"), _open(10, "/A"), _close(11, "/A"), _close(100, "/B")]
    assert stats.close_anomalies(events) == 2


def test_lifetime_count_non_increasing_in_tau():
    rng = random.Random(13)
    events = session_schedule(rng, 150)
    thresholds = [int(d * DAY) for d in (0.5, 1.2, 2, 5, 10)]
    counts = [len(stats.segment_lifetimes(events, tau)) for tau in thresholds]
    assert counts == sorted(counts, reverse=True)


# -------------------------------------------------------------------- sweeps


def test_threshold_sweep_singleton_grand_mean():
    events = [_open(0, "/A"), _close(2 * HOUR, "/A")]
    result = stats.threshold_sweep(events, [DAY])
    assert len(result.points) == 1
    assert result.grand_mean_hours == result.points[0].mean_duration_hours == 2.0


def test_threshold_sweep_fixed_length_stream():
    events = [_open(0, "/A"), _close(3 * HOUR, "/A")]
    result = stats.threshold_sweep(events, [DAY * d for d in range(1, 11)])
    assert all(p.mean_duration_hours == 3.0 for p in result.points)
    assert result.grand_mean_hours == 3.0


def test_threshold_sweep_empty_thresholds_rejected():
    with pytest.raises(ValueError):
        stats.threshold_sweep([_open(0, "/A")], [])


# ----------------------------------------------------------------- quantiles


def test_lifetime_quantile_report_example():
    records = [
        stats.LifetimeRecord("/a", 0, int(0.5 * HOUR), 1, False),
        stats.LifetimeRecord("/b", 0, 2 * HOUR, 1, False),
        stats.LifetimeRecord("/c", 0, 20 * HOUR, 1, False),
    ]
    fractions = stats.lifetime_quantile_report(records)
    assert fractions == [pytest.approx(1 / 3), pytest.approx(2 / 3), pytest.approx(2 / 3)]


def test_lifetime_quantile_report_degenerate_all_zero():
    records = [stats.LifetimeRecord("/a", 5, 5, 1, True)] * 3
    assert stats.lifetime_quantile_report(records) == [1.0, 1.0, 1.0]


def test_lifetime_quantile_report_empty_rejected():
    with pytest.raises(ValueError):
        stats.lifetime_quantile_report([])


def test_lifetime_summary_fields():
    records = [
        stats.LifetimeRecord("/a", 0, 2 * HOUR, 2, False),
        stats.LifetimeRecord("/b", 0, 6 * HOUR, 1, True),
    ]
    summary = stats.lifetime_summary(records)
    assert summary["count"] == 2
    assert summary["incomplete"] == 1
    assert summary["mean_hours"] == 4.0
    assert summary["median_hours"] == 4.0
    assert summary["fraction_under_1h"] == 0.0
    assert summary["fraction_under_5h"] == 0.5
    assert summary["fraction_under_10h"] == 1.0


# ---------------------------------------------------------------- histograms


def test_build_histogram_trivial_example():
    hist = stats.build_histogram([1, 2, 3], [0, 2, 4])
    assert hist.counts == (1, 2)
    assert hist.edges == (0.0, 2.0, 4.0)
    assert hist.total == 3


def test_build_histogram_empty_samples():
    hist = stats.build_histogram([], [0, 1, 2])
    assert hist.counts == (0, 0)


def test_build_histogram_rejects_bad_edges():
    with pytest.raises(ValueError):
        stats.build_histogram([1], [0, 0, 1])
    with pytest.raises(ValueError):
        stats.build_histogram([1], [3])


def test_build_histogram_matches_naive_scan():
    rng = random.Random(4)
    samples = [rng.uniform(0, 50) for _ in range(5000)]
    edges = [0, 5, 10, 20, 35, 50]
    hist = stats.build_histogram(samples, edges)
    naive = [0] * (len(edges) - 1)
    for sample in samples:
        for i in range(len(edges) - 1):
            last = i == len(edges) - 2
            if edges[i] <= sample < edges[i + 1] or (last and sample == edges[i + 1]):
                naive[i] += 1
                break
    assert list(hist.counts) == naive
    assert hist.total == sum(naive)


def test_uniform_edges_layout():
    assert stats.uniform_edges(0, 10, 2.5) == (0.0, 2.5, 5.0, 7.5, 10.0)
    assert stats.LIFETIME_EDGES_HOURS[0] == 0.0
    assert stats.LIFETIME_EDGES_HOURS[-1] == 240.0
    assert len(stats.READ_COUNT_EDGES) == 81  # width-25 bins over [0, 2000]
