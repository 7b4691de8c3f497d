from __future__ import annotations

import pytest
from dnslib import DNSRecord

from tidns import exceptions
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import Rcode
from tidns.dnscore import RecordCache
from tidns.dnscore import RecordSet
from tidns.dnscore import Status
from tidns.dnscore import WireMessage
from tidns.dnscore import compare_record
from tidns.dnscore import error_reply
from tidns.dnscore import wire_decode
from tidns.dnscore import wire_encode


def test_query_is_normalized() -> None:
    assert Query("WWW.Foo.com", "a") == Query("www.foo.com.", QType.A)
    assert str(Query("www.foo.com", QType.AAAA)) == "www.foo.com./AAAA"


@pytest.mark.parametrize("value", ["MX", 15, "bogus"])
def test_unsupported_qtype(value: str | int) -> None:
    with pytest.raises(exceptions.UnsupportedQTypeError):
        QType.parse(value)


def test_recordset_ignores_order(query: Query) -> None:
    left = RecordSet.create(query, ["192.0.2.1", "192.0.2.2"])
    right = RecordSet.create(query, ["192.0.2.2", "192.0.2.1"], ttl=60)

    assert compare_record(left, right) == Status.VERIFIED


def test_recordset_differs(answer: RecordSet, forged: RecordSet) -> None:
    assert compare_record(answer, forged) == Status.UNVERIFIED


def test_negative_never_matches_positive(
    query: Query, answer: RecordSet
) -> None:
    negative = RecordSet.nxdomain(query)

    assert negative.ttl == 0
    assert compare_record(negative, answer) == Status.UNVERIFIED
    assert compare_record(negative, RecordSet.nxdomain(query)) == (
        Status.VERIFIED
    )


def test_compare_different_queries(answer: RecordSet) -> None:
    other = RecordSet.create(Query("bar.com", QType.A), ["192.0.2.1"])

    with pytest.raises(exceptions.QueryMismatchError):
        compare_record(answer, other)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rrs": frozenset()},
        {"rrs": frozenset(["192.0.2.1"]), "negative": True},
        {"rrs": frozenset(["192.0.2.1"]), "ttl": -1},
        {"rrs": frozenset(["not an address"])},
    ],
)
def test_recordset_rejects(query: Query, kwargs: dict) -> None:
    with pytest.raises(ValueError):
        RecordSet(query=query, **kwargs)


class TestCache:
    def test_fresh_until_ttl(self, answer: RecordSet) -> None:
        cache = RecordCache()
        cache.put(answer, 1000.0, ttl=5)

        assert cache.get(answer.query, 5999.0) == answer
        assert cache.get(answer.query, 6000.0) is None
        assert len(cache) == 0

    def test_zero_ttl_is_not_cached(self, query: Query) -> None:
        cache = RecordCache()
        cache.put(RecordSet.nxdomain(query), 0.0)

        assert cache.get(query, 0.0) is None

    def test_newer_answer_replaces(
        self, answer: RecordSet, forged: RecordSet
    ) -> None:
        cache = RecordCache()
        cache.put(answer, 0.0)
        cache.put(forged, 1.0)

        assert cache.get(answer.query, 2.0) == forged


class TestWire:
    def test_query(self, query: Query) -> None:
        message = WireMessage(id=77, query=query)

        assert wire_decode(wire_encode(message)) == message

    def test_verified_response(self, answer: RecordSet) -> None:
        message = WireMessage(
            id=1,
            query=answer.query,
            is_response=True,
            answer=answer,
            status=Status.VERIFIED,
        )

        assert wire_decode(wire_encode(message)) == message

    def test_unverified_with_previous(
        self, answer: RecordSet, forged: RecordSet
    ) -> None:
        message = WireMessage(
            id=2,
            query=answer.query,
            is_response=True,
            answer=forged,
            status=Status.UNVERIFIED,
            previously_verified=answer,
        )
        decoded = wire_decode(wire_encode(message))

        assert decoded.answer == forged
        assert decoded.previously_verified == answer
        assert decoded.status == Status.UNVERIFIED

    def test_negative(self, query: Query) -> None:
        message = WireMessage(
            id=3,
            query=query,
            is_response=True,
            rcode=Rcode.NXDOMAIN,
            answer=RecordSet.nxdomain(query, ttl=300),
        )
        decoded = wire_decode(wire_encode(message))

        assert decoded.rcode == Rcode.NXDOMAIN
        assert decoded.answer == RecordSet.nxdomain(query)

    def test_status_option_is_plain_edns(self, answer: RecordSet) -> None:
        packet = wire_encode(
            WireMessage(
                id=4,
                query=answer.query,
                is_response=True,
                answer=answer,
                status=Status.VERIFIED,
            )
        )
        parsed = DNSRecord.parse(packet)

        assert [str(rr.rdata) for rr in parsed.rr] == ["192.0.2.1"]

    def test_truncated(self, answer: RecordSet) -> None:
        packet = wire_encode(
            WireMessage(
                id=5, query=answer.query, is_response=True, answer=answer
            )
        )

        with pytest.raises(exceptions.WireDecodeError) as exc_info:
            wire_decode(packet[:-3])

        assert 0 <= exc_info.value.offset <= len(packet)

    def test_short_header(self) -> None:
        with pytest.raises(exceptions.WireDecodeError):
            wire_decode(b"\x00\x01\x00")

    def test_unsupported_question(self) -> None:
        packet = bytes(DNSRecord.question("foo.com", "MX").pack())

        with pytest.raises(exceptions.UnsupportedQTypeError):
            wire_decode(packet)

    @pytest.mark.parametrize("rcode", [5, 9, 15])
    def test_unknown_rcode(self, rcode: int) -> None:
        request = DNSRecord.question("foo.com")
        request.header.rcode = rcode

        with pytest.raises(exceptions.WireDecodeError) as exc_info:
            wire_decode(bytes(request.pack()))

        assert exc_info.value.offset == 3

    def test_error_reply_keeps_id(self) -> None:
        request = DNSRecord.question("foo.com", "MX")
        reply = DNSRecord.parse(
            error_reply(bytes(request.pack()), Rcode.NOTIMP)
        )

        assert reply.header.id == request.header.id
        assert reply.header.rcode == Rcode.NOTIMP
