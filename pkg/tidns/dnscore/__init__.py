from tidns.dnscore.cache import CacheEntry
from tidns.dnscore.cache import RecordCache
from tidns.dnscore.records import DEFAULT_TTL
from tidns.dnscore.records import Query
from tidns.dnscore.records import QType
from tidns.dnscore.records import RecordSet
from tidns.dnscore.records import Status
from tidns.dnscore.records import compare_record
from tidns.dnscore.wire import Rcode
from tidns.dnscore.wire import WireMessage
from tidns.dnscore.wire import error_reply
from tidns.dnscore.wire import wire_decode
from tidns.dnscore.wire import wire_encode


__all__ = (
    "DEFAULT_TTL",
    "CacheEntry",
    "Query",
    "QType",
    "Rcode",
    "RecordCache",
    "RecordSet",
    "Status",
    "WireMessage",
    "compare_record",
    "error_reply",
    "wire_decode",
    "wire_encode",
)
