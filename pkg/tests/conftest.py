from __future__ import annotations

import typing as t

import pytest

from tidns.contracts import IncentiveParams
from tidns.contracts import seed_verified_record
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet
from tidns.ledger import Ledger
from tidns.resolver import ResolverNode
from tidns.simnet import Zone
from tidns.simnet import ZoneUpstream


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.ledger import Transaction


RESOLVERS = [f"r{index:02d}" for index in range(12)]


class RecordingHost:
    """A host that keeps submitted transactions and timers for a test."""

    submitted: list[Transaction]
    timers: list[tuple[tt.TimeMs, t.Callable[[tt.TimeMs], None], str]]

    def __init__(self) -> None:
        self.submitted = []
        self.timers = []

    def submit(self, tx: Transaction) -> None:
        self.submitted.append(tx)

    def call_later(
        self,
        delay_ms: tt.TimeMs,
        callback: t.Callable[[tt.TimeMs], None],
        *,
        kind: str,
    ) -> None:
        self.timers.append((delay_ms, callback, kind))


@pytest.fixture()
def params() -> IncentiveParams:
    return IncentiveParams(voters_n=5)


@pytest.fixture()
def ledger(params: IncentiveParams) -> Ledger:
    ledger = Ledger()
    for resolver_id in RESOLVERS:
        ledger.enroll(resolver_id, params.initial_stake)

    return ledger


@pytest.fixture()
def query() -> Query:
    return Query("www.foo.com", QType.A)


@pytest.fixture()
def answer(query: Query) -> RecordSet:
    return RecordSet.create(query, ["192.0.2.1"])


@pytest.fixture()
def forged(query: Query) -> RecordSet:
    return RecordSet.create(query, ["10.0.0.1"])


@pytest.fixture()
def verified_ledger(ledger: Ledger, answer: RecordSet) -> Ledger:
    ledger.commit_block(
        [seed_verified_record(ledger, answer, "r00", RESOLVERS[1:6])]
    )

    return ledger


@pytest.fixture()
def zone(answer: RecordSet) -> Zone:
    return Zone({answer.query: answer})


@pytest.fixture()
def host() -> RecordingHost:
    return RecordingHost()


@pytest.fixture()
def make_node(
    ledger: Ledger,
    params: IncentiveParams,
    zone: Zone,
    host: RecordingHost,
) -> t.Callable[[str], ResolverNode]:
    def factory(identity: str) -> ResolverNode:
        return ResolverNode(
            identity,
            ledger=ledger,
            params=params,
            upstream=ZoneUpstream(zone),
            host=host,
        )

    return factory
