from __future__ import annotations

import dataclasses
import enum
import ipaddress
import typing as t

from tidns import exceptions


if t.TYPE_CHECKING:
    import typing_extensions as te


DEFAULT_TTL = 300


class QType(enum.Enum):
    A = "A"
    AAAA = "AAAA"
    NS = "NS"
    CNAME = "CNAME"

    @property
    def code(self) -> int:
        return _QTYPE_CODES[self]

    @classmethod
    def parse(cls, value: str | int | QType) -> te.Self:
        if isinstance(value, cls):
            return value

        if isinstance(value, int):
            for qtype, code in _QTYPE_CODES.items():
                if code == value:
                    return t.cast("te.Self", qtype)
            raise exceptions.UnsupportedQTypeError(value)

        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise exceptions.UnsupportedQTypeError(value) from None


_QTYPE_CODES = {QType.A: 1, QType.NS: 2, QType.CNAME: 5, QType.AAAA: 28}


class Status(enum.Enum):
    VERIFIED = "verified"
    UNVERIFIED = "unverified"


def normalize_name(name: str) -> str:
    name = name.strip().lower()
    if not name.endswith("."):
        name += "."

    return name


def normalize_rdata(qtype: QType, rdata: str) -> str:
    match qtype:
        case QType.A:
            return ipaddress.IPv4Address(rdata.strip()).compressed
        case QType.AAAA:
            return ipaddress.IPv6Address(rdata.strip()).compressed

    return normalize_name(rdata)


@dataclasses.dataclass(frozen=True, slots=True)
class Query:
    qname: str
    qtype: QType

    def __post_init__(self) -> None:
        object.__setattr__(self, "qname", normalize_name(self.qname))
        object.__setattr__(self, "qtype", QType.parse(self.qtype))

    def __str__(self) -> str:
        return f"{self.qname}/{self.qtype.value}"


@dataclasses.dataclass(frozen=True, slots=True)
class RecordSet:
    """A DNS answer as an order-insensitive set of resource records.

    Negative answers (NXDOMAIN) are empty sets flagged with ``negative``;
    a positive answer always holds at least one record.
    """

    query: Query
    rrs: frozenset[str]
    ttl: int = DEFAULT_TTL
    negative: bool = False

    def __post_init__(self) -> None:
        rrs = frozenset(
            normalize_rdata(self.query.qtype, rdata) for rdata in self.rrs
        )
        object.__setattr__(self, "rrs", rrs)

        if self.negative and rrs:
            raise ValueError(f"Negative answer for {self.query} has records")
        if not self.negative and not rrs:
            raise ValueError(f"Positive answer for {self.query} is empty")
        if self.ttl < 0:
            raise ValueError(f"Negative TTL {self.ttl}")

    @classmethod
    def create(
        cls, query: Query, rrs: t.Iterable[str], ttl: int = DEFAULT_TTL
    ) -> te.Self:
        return cls(query=query, rrs=frozenset(rrs), ttl=ttl)

    @classmethod
    def nxdomain(cls, query: Query, ttl: int = 0) -> te.Self:
        return cls(query=query, rrs=frozenset(), ttl=ttl, negative=True)

    def sorted_rrs(self) -> list[str]:
        return sorted(self.rrs)


def compare_record(left: RecordSet, right: RecordSet) -> Status:
    if left.query != right.query:
        raise exceptions.QueryMismatchError(left.query, right.query)

    if left.rrs == right.rrs and left.negative == right.negative:
        return Status.VERIFIED

    return Status.UNVERIFIED
