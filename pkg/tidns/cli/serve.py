from __future__ import annotations

import argparse
import logging
import pathlib
import threading
import typing as t

from tidns.resolver import LiveNetwork
from tidns.resolver import UdpUpstream
from tidns.resolver import serve_udp
from tidns.simnet import Zone
from tidns.simnet import ZoneUpstream


if t.TYPE_CHECKING:
    from tidns.resolver import Upstream


LOG = logging.getLogger(__name__)


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "serve", description="Run a ledger-verified resolver over UDP"
    )

    subparser.add_argument(
        "-a", "--address", default="127.0.0.1", help="Address to bind"
    )
    subparser.add_argument(
        "-p", "--port", type=int, default=5353, help="UDP port to bind"
    )
    subparser.add_argument(
        "-z",
        "--zone",
        type=pathlib.Path,
        default=None,
        help="Zone file (TOML or JSON) answering upstream questions",
    )
    subparser.add_argument(
        "-u",
        "--upstream",
        default=None,
        metavar="HOST[:PORT]",
        help="Forward upstream questions to this DNS server instead",
    )
    subparser.add_argument(
        "-r",
        "--resolvers",
        type=int,
        default=12,
        help="Resolver nodes sharing the ledger",
    )
    subparser.add_argument(
        "--seed-zone",
        action="store_true",
        default=False,
        help="Commit the zone records as verified before serving",
    )
    subparser.set_defaults(func=main)


def make_upstream(options: argparse.Namespace, zone: Zone) -> Upstream:
    if options.upstream is None:
        return ZoneUpstream(zone)

    host, _, port = options.upstream.partition(":")

    return UdpUpstream(host, int(port or 53))


def main(options: argparse.Namespace) -> None:
    zone = Zone.load(options.zone) if options.zone else Zone()
    network = LiveNetwork(
        [f"r{index:02d}" for index in range(options.resolvers)],
        make_upstream(options, zone),
    )

    with network:
        if options.seed_zone:
            network.seed_records(zone.records.values())

        front = network.nodes[min(network.nodes)]
        server = serve_udp(
            front, network.clock, address=options.address, port=options.port
        )

        try:
            threading.Event().wait()
        except KeyboardInterrupt:
            LOG.info("Interrupted")
        finally:
            server.stop()
