from __future__ import annotations

import logging
import socket
import typing as t

from dnslib import DNSError
from dnslib import DNSRecord
from dnslib import RCODE
from dnslib.server import BaseResolver
from dnslib.server import DNSHandler
from dnslib.server import DNSLogger
from dnslib.server import DNSServer

from tidns import exceptions
from tidns.dnscore import Rcode
from tidns.dnscore import RecordSet
from tidns.dnscore import WireMessage
from tidns.dnscore import error_reply
from tidns.dnscore import wire_decode
from tidns.dnscore import wire_encode
from tidns.dnscore.wire import collect_rrs


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.dnscore import Query
    from tidns.resolver.node import ResolverNode


LOG = logging.getLogger(__name__)


class LedgerResolver(BaseResolver):  # type: ignore[misc]
    """Answer wire queries through a resolver node."""

    node: ResolverNode
    clock: t.Callable[[], tt.TimeMs]

    def __init__(
        self, node: ResolverNode, clock: t.Callable[[], tt.TimeMs]
    ) -> None:
        self.node = node
        self.clock = clock

    def answer_packet(self, packet: bytes) -> bytes:
        try:
            message = wire_decode(packet)
        except exceptions.UnsupportedQTypeError as exc:
            LOG.info("Refuse query: %s", exc)
            return error_reply(packet, Rcode.NOTIMP)
        except exceptions.WireDecodeError as exc:
            LOG.warning("Malformed packet: %s", exc)
            return error_reply(packet, Rcode.FORMERR)

        if message.is_response:
            LOG.warning("Got a response %d instead of a query", message.id)
            return error_reply(packet, Rcode.FORMERR)

        response = self.node.resolve_query(message.query, self.clock())

        return wire_encode(
            WireMessage(
                id=message.id,
                query=message.query,
                is_response=True,
                rcode=response.rcode,
                answer=response.answer,
                status=response.status,
                previously_verified=response.previously_verified,
            )
        )

    def resolve(self, request: DNSRecord, handler: DNSHandler) -> DNSRecord:
        return DNSRecord.parse(self.answer_packet(bytes(request.pack())))


class StatusHandler(DNSHandler):  # type: ignore[misc]
    def get_reply(self, data: bytes) -> bytes:
        return self.server.resolver.answer_packet(data)


class LoggingDNSLogger(DNSLogger):  # type: ignore[misc]
    """Route dnslib server chatter into logging."""

    def __init__(self) -> None:
        super().__init__()

    def log_error(self, handler: DNSHandler, exc: Exception) -> None:
        LOG.error(
            "Cannot handle request from %s: %s", handler.client_address, exc
        )

    def log_request(self, handler: DNSHandler, request: DNSRecord) -> None:
        LOG.debug("Request from %s: %s", handler.client_address, request.q)

    def log_reply(self, handler: DNSHandler, reply: DNSRecord) -> None:
        LOG.debug("Reply to %s: %s", handler.client_address, reply.q)

    def log_truncated(self, handler: DNSHandler, reply: DNSRecord) -> None:
        LOG.warning("Truncated reply to %s", handler.client_address)


class UdpUpstream:
    """Forward questions to a real DNS server over UDP."""

    address: str
    port: int
    timeout: float

    def __init__(
        self, address: str, port: int = 53, *, timeout: float = 2.0
    ) -> None:
        self.address = address
        self.port = port
        self.timeout = timeout

    def resolve(self, query: Query, now: tt.TimeMs) -> RecordSet:
        request = DNSRecord.question(query.qname, query.qtype.value)

        try:
            packet = request.send(
                self.address, self.port, timeout=self.timeout
            )
            reply = DNSRecord.parse(packet)
        except (socket.timeout, OSError, DNSError) as exc:
            raise exceptions.UpstreamTimeoutError(query.qname, 1) from exc

        if reply.header.rcode == RCODE.NXDOMAIN:
            return RecordSet.nxdomain(query)

        answer = collect_rrs(query, reply.rr)
        if answer is None:
            return RecordSet.nxdomain(query)

        return answer


def serve_udp(
    node: ResolverNode,
    clock: t.Callable[[], tt.TimeMs],
    *,
    address: str = "127.0.0.1",
    port: int = 5353,
) -> DNSServer:
    """Start the UDP front-end in a background thread and return it."""

    server = DNSServer(
        LedgerResolver(node, clock),
        port=port,
        address=address,
        logger=LoggingDNSLogger(),
        handler=StatusHandler,
    )
    server.start_thread()

    LOG.info("%s listens on udp://%s:%d", node.identity, address, port)

    return server
