from tidns.resolver.live import LiveNetwork
from tidns.resolver.node import ClientResponse
from tidns.resolver.node import Host
from tidns.resolver.node import ResolverNode
from tidns.resolver.node import Upstream
from tidns.resolver.server import LedgerResolver
from tidns.resolver.server import UdpUpstream
from tidns.resolver.server import serve_udp


__all__ = (
    "ClientResponse",
    "Host",
    "LedgerResolver",
    "LiveNetwork",
    "ResolverNode",
    "UdpUpstream",
    "Upstream",
    "serve_udp",
)
