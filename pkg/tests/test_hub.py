from __future__ import annotations

import threading

import pytest

from tidns.hub import EventHub
from tidns.hub import ReplicationHub
from tidns.hub import Scheduler


def square(value: int) -> int:
    return value * value


@pytest.mark.parametrize("num_workers", [1, 2])
def test_replication_keeps_job_order(num_workers: int) -> None:
    with ReplicationHub(num_workers=num_workers) as hub:
        assert hub.run_all(square, range(10)) == [x * x for x in range(10)]


def test_closed_replication_hub() -> None:
    hub = ReplicationHub(num_workers=1)
    hub.shutdown()

    with pytest.raises(RuntimeError):
        hub.run_all(square, [1])


def test_event_hub_delivers() -> None:
    received = []
    done = threading.Event()

    def callback(value: int) -> None:
        received.append(value)
        done.set()

    with EventHub(num_workers=1) as hub:
        assert hub.send(callback, 42)
        assert done.wait(5)

    assert received == [42]


def test_event_hub_survives_failing_callback() -> None:
    done = threading.Event()

    def broken() -> None:
        raise ValueError("boom")

    with EventHub(num_workers=1) as hub:
        hub.send(broken)
        hub.send(done.set)

        assert done.wait(5)


def test_event_hub_drops_when_closed() -> None:
    hub = EventHub(num_workers=1)
    hub.shutdown()

    assert not hub.send(print, "never")
    assert not hub.is_working()


def test_event_hub_drops_over_limit() -> None:
    gate = threading.Event()

    with EventHub(num_workers=1, in_progress_limit=1) as hub:
        assert hub.send(gate.wait, 5)
        assert not hub.send(gate.wait, 5)
        gate.set()


def test_scheduler_repeats() -> None:
    calls = []
    done = threading.Event()

    def tick() -> None:
        calls.append(1)
        if len(calls) >= 3:
            done.set()

    scheduler = Scheduler(0.01, tick)
    scheduler.start()
    try:
        assert done.wait(5)
    finally:
        scheduler.stop()

    assert len(calls) >= 3
    assert not scheduler.is_running()


def test_scheduler_survives_failures() -> None:
    done = threading.Event()

    def tick() -> None:
        if scheduler.ticks >= 3:
            done.set()
        raise RuntimeError("ledger is down")

    scheduler = Scheduler(0.01, tick, name="cutter")
    scheduler.start()
    try:
        assert done.wait(5)
    finally:
        scheduler.stop(timeout=5)

    assert scheduler.failures >= 3


def test_scheduler_starts_once() -> None:
    scheduler = Scheduler(10.0, lambda: None)
    scheduler.start()
    try:
        with pytest.raises(RuntimeError):
            scheduler.start()
    finally:
        scheduler.stop(timeout=5)


def test_scheduler_rejects_bad_period() -> None:
    with pytest.raises(ValueError):
        Scheduler(0, lambda: None)
