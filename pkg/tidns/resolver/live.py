from __future__ import annotations

import logging
import threading
import time
import typing as t

from tidns.contracts import EVENT_VALIDATION_REQUEST
from tidns.contracts import EVENT_VOTE_NOTICE
from tidns.contracts import IncentiveParams
from tidns.contracts import ValidationRequest
from tidns.contracts import VoteNotice
from tidns.contracts import seed_verified_record
from tidns.hub import EventHub
from tidns.hub import Scheduler
from tidns.ledger import Ledger
from tidns.ledger import Orderer
from tidns.ledger import TxValidationCode
from tidns.resolver.node import ResolverNode


if t.TYPE_CHECKING:
    import typing_extensions as te

    from tidns import types as tt
    from tidns.dnscore import RecordSet
    from tidns.ledger import Block
    from tidns.ledger import Transaction
    from tidns.resolver.node import Upstream


LOG = logging.getLogger(__name__)


class LiveHost:
    network: LiveNetwork
    identity: tt.ResolverID

    def __init__(self, network: LiveNetwork, identity: tt.ResolverID) -> None:
        self.network = network
        self.identity = identity

    def submit(self, tx: Transaction) -> None:
        self.network.submit(tx)

    def call_later(
        self,
        delay_ms: tt.TimeMs,
        callback: t.Callable[[tt.TimeMs], None],
        *,
        kind: str,
    ) -> None:
        self.network.call_later(delay_ms, callback, kind=kind)


class LiveNetwork:
    """Resolver nodes sharing one ledger on the wall clock.

    The orderer cuts blocks on a timer; committed ledger events are
    delivered to the nodes through an event hub.
    """

    ledger: Ledger
    orderer: Orderer
    hub: EventHub
    scheduler: Scheduler
    incentive: IncentiveParams
    nodes: dict[tt.ResolverID, ResolverNode]
    timers: set[threading.Timer]
    lock: threading.Lock
    started_at: float

    def __init__(
        self,
        resolver_ids: t.Iterable[tt.ResolverID],
        upstream: Upstream,
        *,
        incentive: IncentiveParams | None = None,
        block_size: int = 10,
        block_interval_ms: tt.TimeMs = 500.0,
        seed: tt.Seed = 0,
        num_workers: int | None = None,
    ) -> None:
        self.incentive = incentive or IncentiveParams()
        self.ledger = Ledger()
        self.orderer = Orderer(
            self.ledger,
            block_size=block_size,
            block_interval_ms=block_interval_ms,
        )
        self.hub = EventHub(num_workers=num_workers)
        self.scheduler = Scheduler(block_interval_ms / 2000.0, self.tick)
        self.timers = set()
        self.lock = threading.Lock()
        self.started_at = time.monotonic()

        self.nodes = {}
        for index, identity in enumerate(resolver_ids):
            node = ResolverNode(
                identity,
                ledger=self.ledger,
                params=self.incentive,
                upstream=upstream,
                host=LiveHost(self, identity),
                seed=seed + index,
                resolution_log_level=logging.INFO,
            )
            node.enroll()
            self.nodes[identity] = node

        self.ledger.subscribe(self.on_block)

    def __enter__(self) -> te.Self:
        self.start()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.stop()

    def clock(self) -> tt.TimeMs:
        return (time.monotonic() - self.started_at) * 1000.0

    def start(self) -> None:
        self.scheduler.start()
        LOG.info("Live network of %d resolvers has started", len(self.nodes))

    def stop(self) -> None:
        self.scheduler.stop()

        with self.lock:
            for timer in self.timers:
                timer.cancel()
            self.timers.clear()

        self.hub.shutdown()
        LOG.info("Live network has stopped at height %d", self.ledger.height)

    def tick(self) -> None:
        self.orderer.tick(self.clock())

    def submit(self, tx: Transaction) -> None:
        self.orderer.submit(tx, self.clock())

    def call_later(
        self,
        delay_ms: tt.TimeMs,
        callback: t.Callable[[tt.TimeMs], None],
        *,
        kind: str,
    ) -> None:
        def fire() -> None:
            with self.lock:
                self.timers.discard(timer)
            self.hub.send(callback, self.clock())

        timer = threading.Timer(delay_ms / 1000.0, fire)
        timer.daemon = True
        timer.name = f"tidns_{kind}"

        with self.lock:
            self.timers.add(timer)
        timer.start()

    def seed_records(
        self,
        records: t.Iterable[RecordSet],
        creator_id: tt.ResolverID | None = None,
    ) -> int:
        """Commit verified genesis records in one block."""

        creator_id = creator_id or min(self.nodes)
        now = self.clock()
        txs = [
            seed_verified_record(
                self.ledger, record, creator_id, self.nodes, timestamp=now
            ).seal()
            for record in records
            if not record.negative
        ]
        if txs:
            self.ledger.commit_block(txs)

        LOG.info("Seeded %d verified records as %s", len(txs), creator_id)

        return len(txs)

    def on_block(self, block: Block) -> None:
        now = self.clock()

        for tx, code in zip(block.transactions, block.validation_codes):
            if (node := self.nodes.get(tx.submitter)) is not None:
                self.hub.send(node.on_committed, tx, code, now)

            if code != TxValidationCode.VALID:
                continue

            for event in tx.events:
                for recipient in event.recipients:
                    if (node := self.nodes.get(recipient)) is None:
                        continue

                    if event.name == EVENT_VALIDATION_REQUEST:
                        self.hub.send(
                            node.on_validation_request,
                            ValidationRequest.from_payload(event.payload),
                            now,
                        )
                    elif event.name == EVENT_VOTE_NOTICE:
                        self.hub.send(
                            node.on_vote_notice,
                            VoteNotice.from_payload(event.payload),
                            now,
                        )
