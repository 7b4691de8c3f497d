from __future__ import annotations

import dataclasses
import enum
import re
import struct

from dnslib import AAAA
from dnslib import CNAME
from dnslib import DNSError
from dnslib import DNSHeader
from dnslib import DNSQuestion
from dnslib import DNSRecord
from dnslib import EDNS0
from dnslib import EDNSOption
from dnslib import NS
from dnslib import QTYPE
from dnslib import RR
from dnslib import A

from tidns import exceptions
from tidns.dnscore.records import Query
from tidns.dnscore.records import QType
from tidns.dnscore.records import RecordSet
from tidns.dnscore.records import Status


STATUS_OPTION_CODE = 65001
EDNS_UDP_LEN = 1232
HEADER_LEN = 12
RCODE_OFFSET = 3

_OFFSET_RE = re.compile(r"offset=(\d+)")
_RDATA_CLASSES = {
    QType.A: A,
    QType.AAAA: AAAA,
    QType.NS: NS,
    QType.CNAME: CNAME,
}


class Rcode(enum.IntEnum):
    NOERROR = 0
    FORMERR = 1
    SERVFAIL = 2
    NXDOMAIN = 3
    NOTIMP = 4


@dataclasses.dataclass(frozen=True, kw_only=True)
class WireMessage:
    """The wire subset: header, one question, answers and status.

    Negative answers travel as NXDOMAIN with no records and decode back
    with a zero TTL.
    """

    id: int  # noqa: VNE003
    query: Query
    is_response: bool = False
    rcode: Rcode = Rcode.NOERROR
    answer: RecordSet | None = None
    status: Status | None = None
    previously_verified: RecordSet | None = None


def wire_encode(message: WireMessage) -> bytes:
    header = DNSHeader(
        id=message.id,
        qr=int(message.is_response),
        rd=1,
        ra=int(message.is_response),
        rcode=int(message.rcode),
    )
    record = DNSRecord(
        header, q=DNSQuestion(message.query.qname, message.query.qtype.code)
    )

    if message.answer is not None:
        for rr in make_rrs(message.answer):
            record.add_answer(rr)

    if message.status is not None:
        flag = b"\x01" if message.status == Status.VERIFIED else b"\x00"
        record.add_ar(
            EDNS0(
                udp_len=EDNS_UDP_LEN,
                opts=[EDNSOption(STATUS_OPTION_CODE, flag)],
            )
        )

    if message.previously_verified is not None:
        for rr in make_rrs(message.previously_verified):
            record.add_ar(rr)

    return bytes(record.pack())


def wire_decode(packet: bytes) -> WireMessage:
    try:
        record = DNSRecord.parse(packet)
    except DNSError as exc:
        raise exceptions.WireDecodeError(
            get_error_offset(str(exc), len(packet)), str(exc)
        ) from exc

    if not record.questions:
        raise exceptions.WireDecodeError(HEADER_LEN, "no question")

    question = record.questions[0]
    query = Query(str(question.qname), QType.parse(int(question.qtype)))

    try:
        rcode = Rcode(record.header.rcode)
    except ValueError as exc:
        raise exceptions.WireDecodeError(RCODE_OFFSET, str(exc)) from exc

    try:
        answer = collect_rrs(query, record.rr)
        previously_verified = collect_rrs(
            query, [rr for rr in record.ar if rr.rtype != QTYPE.OPT]
        )
    except (ValueError, DNSError) as exc:
        raise exceptions.WireDecodeError(HEADER_LEN, str(exc)) from exc

    if answer is None and rcode == Rcode.NXDOMAIN:
        answer = RecordSet.nxdomain(query)

    status = None
    for rr in record.ar:
        if rr.rtype != QTYPE.OPT:
            continue
        for option in get_edns_options(rr):
            if option.code == STATUS_OPTION_CODE:
                status = (
                    Status.VERIFIED
                    if bytes(option.data) == b"\x01"
                    else Status.UNVERIFIED
                )

    return WireMessage(
        id=record.header.id,
        query=query,
        is_response=bool(record.header.qr),
        rcode=rcode,
        answer=answer,
        status=status,
        previously_verified=previously_verified,
    )


def error_reply(packet: bytes, rcode: Rcode) -> bytes:
    try:
        request = DNSRecord.parse(packet)
    except DNSError:
        request_id = 0
        if len(packet) >= 2:
            request_id = struct.unpack(">H", packet[:2])[0]
        reply = DNSRecord(DNSHeader(id=request_id, qr=1, ra=1, rcode=rcode))
    else:
        reply = request.reply()
        reply.header.rcode = int(rcode)

    return bytes(reply.pack())


def make_rrs(answer: RecordSet) -> list[RR]:
    rdata_cls = _RDATA_CLASSES[answer.query.qtype]

    return [
        RR(
            rname=answer.query.qname,
            rtype=answer.query.qtype.code,
            ttl=answer.ttl,
            rdata=rdata_cls(rdata),
        )
        for rdata in answer.sorted_rrs()
    ]


def collect_rrs(query: Query, rrs: list[RR]) -> RecordSet | None:
    matching = [rr for rr in rrs if rr.rtype == query.qtype.code]
    if not matching:
        return None

    return RecordSet.create(
        query,
        (str(rr.rdata) for rr in matching),
        ttl=min(int(rr.ttl) for rr in matching),
    )


def get_edns_options(rr: RR) -> list[EDNSOption]:
    # dnslib < 1.0 keeps options as a list, newer versions wrap them
    if isinstance(rr.rdata, list):
        return rr.rdata

    return list(getattr(rr.rdata, "options", []))


def get_error_offset(message: str, default: int) -> int:
    found = _OFFSET_RE.findall(message)
    if not found:
        return default

    return int(found[-1])
