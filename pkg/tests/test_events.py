"""Unit tests for the event model and timestamp helpers."""

import dataclasses
import datetime as dt
import random

import pytest

from xctrace.events import (
    EVENT_KINDS,
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
    Transfer,
    day_of,
    day_start,
    format_timestamp,
    kind_of,
    parse_timestamp,
    validate_event,
)


def test_parse_timestamp_known_value():
    # 2021-08-05 14:02:37 UTC
    ts = parse_timestamp("210805 14:02:37")
    assert ts == 1628172157


def test_format_parse_round_trip_random():
    rng = random.Random(42)
    for _ in range(200):
        ts = rng.randrange(946684800, 2114380800)  # 2000..2037
        assert parse_timestamp(format_timestamp(ts)) == ts


def test_parse_timestamp_rejects_garbage():
    for bad in ("", "banana", "2021-08-05 14:02:37", "210805"):
        with pytest.raises(ValueError):
            parse_timestamp(bad)


def test_day_helpers_agree():
    ts = parse_timestamp("210805 14:02:37")
    assert day_of(ts) == dt.date(2021, 8, 5)
    assert day_start(dt.date(2021, 8, 5)) == parse_timestamp("210805 00:00:00")
    assert day_of(day_start(dt.date(2021, 8, 5))) == dt.date(2021, 8, 5)


def test_kind_of_covers_all_event_types():
    session = SessionKey("42", "alice")
    cases = [
        (Open(ts=0, session=session, path="/a"), KIND_OPEN),
        (Close(ts=0, session=session, path="/a"), KIND_CLOSE),
        (Read(ts=0, session=session, path="/a", size=1, offset=0), KIND_READ),
        (ReadV(ts=0, session=session, chunks=((1, 0),)), KIND_READV),
        (Transfer(ts=0, path="/a", size=1), KIND_TRANSFER),
    ]
    seen = set()
    for event, kind in cases:
        assert kind_of(event) == kind
        seen.add(kind)
    assert seen == set(EVENT_KINDS)


def test_events_are_frozen():
    event = Transfer(ts=0, path="/a", size=1)
    with pytest.raises(dataclasses.FrozenInstanceError):
        event.size = 2


def test_readv_total_size_is_chunk_sum():
    event = ReadV(ts=0, session=SessionKey("1", "u"), chunks=((10, 0), (20, 5), (30, 9)))
    assert event.total_size == 60


def test_validate_event_flags_bad_payloads():
    session = SessionKey("1", "u")
    assert validate_event(Transfer(ts=0, path="/a", size=123)) is None
    assert validate_event(Transfer(ts=0, path="/a", size=0)) is not None
    assert validate_event(ReadV(ts=0, session=session, chunks=())) is not None
    assert validate_event(Read(ts=0, session=session, path="/a", size=1, offset=0)) is None


def test_session_key_equality_and_hash():
    a = SessionKey("7", "bob")
    b = SessionKey("7", "bob")
    c = SessionKey("8", "bob")
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert len({a, b, c}) == 2
