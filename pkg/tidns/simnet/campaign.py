from __future__ import annotations

import dataclasses
import ipaddress
import itertools
import logging
import typing as t

import numpy as np

from tidns.contracts import EVENT_RECORD_FINISHED
from tidns.contracts import EVENT_VALIDATION_REQUEST
from tidns.contracts import EVENT_VOTE_NOTICE
from tidns.contracts import FinishStatus
from tidns.contracts import IncentiveParams
from tidns.contracts import ValidationRequest
from tidns.contracts import VoteNotice
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet
from tidns.ledger import Ledger
from tidns.ledger import Orderer
from tidns.ledger import TxValidationCode
from tidns.resolver.node import ResolverNode
from tidns.simnet.attack import kaminsky_attempt
from tidns.simnet.attack import sample_txids
from tidns.simnet.authoritative import ZoneUpstream
from tidns.simnet.authoritative import authoritative_respond
from tidns.simnet.events import EventKind
from tidns.simnet.events import Simulation
from tidns.simnet.topology import Topology


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.ledger import Block
    from tidns.ledger import Transaction
    from tidns.simnet.events import SimEvent
    from tidns.simnet.params import SimParams


LOG = logging.getLogger(__name__)

FORGED_NETWORK = ipaddress.IPv4Address("10.0.0.0")
FORGED_BATCH_DELAY_MS = 1.0


@dataclasses.dataclass(frozen=True, kw_only=True)
class AttackOutcome:
    attempt_index: int
    poisoned_resolvers: frozenset[tt.ResolverID]
    ledger_accepted_forgery: bool
    client_served_forgery: bool

    def __post_init__(self) -> None:
        if self.client_served_forgery and not self.ledger_accepted_forgery:
            raise ValueError(
                f"Attempt {self.attempt_index} served a forgery as verified "
                "without the ledger accepting it"
            )


@dataclasses.dataclass(frozen=True, kw_only=True)
class StakeSample:
    attempt_index: int
    victim_stake: tt.Stake
    clean_stake: tt.Stake

    @property
    def victim_share(self) -> float:
        total = self.victim_stake + self.clean_stake
        return self.victim_stake / total if total else 0.0


@dataclasses.dataclass(frozen=True, kw_only=True)
class CampaignResult:
    params: SimParams
    outcomes: tuple[AttackOutcome, ...]
    stake_samples: tuple[StakeSample, ...]
    state_root: str
    trace: tuple[SimEvent, ...] = ()
    ledger: Ledger | None = dataclasses.field(
        default=None, repr=False, compare=False
    )

    @property
    def attempts(self) -> int:
        return len(self.outcomes)

    @property
    def successes(self) -> int:
        return sum(
            outcome.ledger_accepted_forgery for outcome in self.outcomes
        )

    @property
    def poisonings(self) -> int:
        return sum(
            len(outcome.poisoned_resolvers) for outcome in self.outcomes
        )

    @property
    def rate(self) -> float:
        return self.successes / self.attempts if self.attempts else 0.0


@dataclasses.dataclass(kw_only=True)
class OutstandingQuery:
    resolver_id: tt.ResolverID
    query: Query
    txids: np.ndarray
    attempt: int | None = None
    vote: ValidationRequest | None = None
    answered: bool = False


class SimHost:
    network: TIDNSNetwork
    identity: tt.ResolverID

    def __init__(self, network: TIDNSNetwork, identity: tt.ResolverID) -> None:
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
        self.network.sim.schedule(
            delay_ms,
            EventKind[kind.upper()],
            {"resolver": self.identity},
            callback,
        )


class TIDNSNetwork:
    """Resolvers, one ledger and an authoritative zone on a simulated clock.

    Client queries open outstanding upstream queries; an attacker may race
    the authentic answer with forged packets. A voter looks the question up
    over the same network, so a victim it votes from is raced on its own.
    Ledger events travel as simulation events so the whole network stays
    on one thread.
    """

    params: SimParams
    incentive: IncentiveParams
    topology: Topology
    sim: Simulation
    ledger: Ledger
    orderer: Orderer
    nodes: dict[tt.ResolverID, ResolverNode]
    rng: np.random.Generator
    outstanding: dict[int, OutstandingQuery]
    outstanding_ids: t.Iterator[int]
    forged_requests: dict[tt.TxID, int]
    accepted: set[int]
    served: set[int]
    poisoned: dict[int, set[tt.ResolverID]]
    victims: frozenset[tt.ResolverID]
    scheduled: int

    def __init__(
        self,
        params: SimParams,
        incentive: IncentiveParams | None = None,
        *,
        topology: Topology | None = None,
        block_size: int = 10,
        block_interval_ms: tt.TimeMs = 500.0,
        record_trace: bool = False,
    ) -> None:
        if topology is not None:
            params = topology.apply_to(params)
        else:
            topology = Topology.create(params)

        self.params = params
        self.incentive = dataclasses.replace(
            incentive or IncentiveParams(), voters_n=params.voters
        )
        self.topology = topology
        self.sim = Simulation(record_trace=record_trace)
        self.ledger = Ledger()
        self.orderer = Orderer(
            self.ledger,
            block_size=block_size,
            block_interval_ms=block_interval_ms,
        )
        self.rng = np.random.Generator(np.random.PCG64(params.seed))
        self.outstanding = {}
        self.outstanding_ids = itertools.count()
        self.forged_requests = {}
        self.accepted = set()
        self.served = set()
        self.poisoned = {}
        self.victims = frozenset(topology.victims)
        self.scheduled = 0

        upstream = ZoneUpstream(topology.zone)
        self.nodes = {}
        for index, identity in enumerate(topology.resolvers):
            node = ResolverNode(
                identity,
                ledger=self.ledger,
                params=self.incentive,
                upstream=upstream,
                host=SimHost(self, identity),
                seed=params.seed + index,
            )
            node.enroll()
            self.nodes[identity] = node

        self.ledger.subscribe(self.on_block)

        self.sim.on(EventKind.CLIENT_QUERY, self.on_client_query)
        self.sim.on(EventKind.FORGED_PACKET_BATCH, self.on_forged_batch)
        self.sim.on(EventKind.UPSTREAM_RESPONSE, self.on_upstream_response)
        self.sim.on(EventKind.VOTE_REQUEST, self.on_vote_request)
        self.sim.on(EventKind.VOTE_CAST, self.on_vote_cast)
        self.sim.on(EventKind.BLOCK_CUT, self.on_block_cut)

    def forged_answer(self, attempt: int) -> RecordSet:
        address = ipaddress.IPv4Address(int(FORGED_NETWORK) + attempt + 1)
        return RecordSet.create(
            self.topology.target, [str(address)], self.params.forged_ttl
        )

    def attempt_for_answer(self, answer: t.Sequence[str]) -> int | None:
        if len(answer) != 1:
            return None

        offset = int(ipaddress.IPv4Address(answer[0])) - int(FORGED_NETWORK)
        if 1 <= offset < 2**24:
            return offset - 1

        return None

    def attempt_time(self, attempt: int) -> tt.TimeMs:
        return (attempt + 1) * self.params.attempt_interval_ms

    def active_attempt(self, now: tt.TimeMs) -> int | None:
        attempt = int(now // self.params.attempt_interval_ms) - 1
        if 0 <= attempt < self.scheduled:
            return attempt

        return None

    def submit(self, tx: Transaction) -> None:
        was_empty = len(self.orderer) == 0
        block = self.orderer.submit(tx, self.sim.now)

        if block is None and was_empty and self.orderer.due_at is not None:
            self.sim.schedule_at(self.orderer.due_at, EventKind.BLOCK_CUT)

    def schedule_genesis(self) -> None:
        self.sim.schedule_at(
            0.0,
            EventKind.CLIENT_QUERY,
            self.query_payload(
                self.topology.genesis_creator, self.topology.target
            ),
        )

    def schedule_attempt(self, attempt: int) -> None:
        start = self.attempt_time(attempt)
        self.scheduled = max(self.scheduled, attempt + 1)
        apex = self.topology.target.qname.partition(".")[2]
        trigger = Query(f"a{attempt}.{apex}", QType.A)

        for victim in self.topology.victims:
            payload = self.query_payload(victim, trigger)
            payload["attempt"] = attempt
            self.sim.schedule_at(start, EventKind.CLIENT_QUERY, payload)

        self.sim.schedule_at(
            start + self.params.check_delay_ms,
            EventKind.CLIENT_QUERY,
            {"attempt": attempt, "check": True},
            lambda now: self.check_served(attempt, now),
        )

    def query_payload(
        self, resolver_id: tt.ResolverID, query: Query
    ) -> tt.EventPayload:
        return {
            "resolver": resolver_id,
            "qname": query.qname,
            "qtype": query.qtype.value,
        }

    def on_client_query(self, event: SimEvent) -> None:
        node = self.nodes[event.payload["resolver"]]
        query = Query(event.payload["qname"], event.payload["qtype"])

        if node.begin_resolution(query, self.sim.now) is not None:
            return

        self.open_query(
            node.identity,
            query,
            outstanding=self.params.outstanding,
            attempt=event.payload.get("attempt"),
        )

    def open_query(
        self,
        resolver_id: tt.ResolverID,
        query: Query,
        *,
        outstanding: int,
        attempt: int | None = None,
        vote: ValidationRequest | None = None,
    ) -> None:
        """Send query upstream; with attempt set the attacker races it."""

        outstanding_id = next(self.outstanding_ids)
        self.outstanding[outstanding_id] = OutstandingQuery(
            resolver_id=resolver_id,
            query=query,
            txids=sample_txids(self.rng, self.params.txid_space, outstanding),
            attempt=attempt,
            vote=vote,
        )

        answer_payload = {
            "resolver": resolver_id,
            "outstanding": outstanding_id,
        }
        _, deliver_at = authoritative_respond(
            query, self.topology.zone, self.params, self.sim.now
        )
        self.sim.schedule_at(
            deliver_at, EventKind.UPSTREAM_RESPONSE, answer_payload
        )

        if attempt is not None and self.params.packets_per_target > 0:
            self.sim.schedule(
                min(FORGED_BATCH_DELAY_MS, self.params.response_time_ms / 2),
                EventKind.FORGED_PACKET_BATCH,
                dict(answer_payload),
            )

    def on_forged_batch(self, event: SimEvent) -> None:
        pending = self.outstanding.get(event.payload["outstanding"])
        if pending is None or pending.answered or pending.attempt is None:
            return

        if not kaminsky_attempt(pending.txids, self.params, self.rng):
            return

        event.payload["poisoned"] = True
        pending.answered = True
        self.poisoned.setdefault(pending.attempt, set()).add(
            pending.resolver_id
        )

        LOG.debug(
            "Attempt %d poisoned %s", pending.attempt, pending.resolver_id
        )

        node = self.nodes[pending.resolver_id]
        forged = self.forged_answer(pending.attempt)
        if pending.vote is not None:
            node.on_validation_request(
                pending.vote, self.sim.now, answer=forged
            )
            return

        # the forged glue hijacks the target; its client asks for it next
        node.complete_resolution(forged, self.sim.now)

    def on_upstream_response(self, event: SimEvent) -> None:
        pending = self.outstanding.pop(event.payload["outstanding"], None)
        if pending is None:
            return

        if pending.answered:
            LOG.debug(
                "Authentic answer for %s at %s arrives too late",
                pending.query,
                pending.resolver_id,
            )
            return

        node = self.nodes[pending.resolver_id]
        answer = self.topology.zone.lookup(pending.query)
        if pending.vote is not None:
            node.on_validation_request(
                pending.vote, self.sim.now, answer=answer
            )
            return

        node.complete_resolution(
            answer, self.sim.now, upstream_ms=self.params.response_time_ms
        )

    def on_vote_request(self, event: SimEvent) -> None:
        # a vote is the voter's own lookup; the attacker floods victims for
        # the whole attempt window but never triggers this query itself
        resolver_id = event.payload["resolver"]
        request = ValidationRequest.from_payload(event.payload)
        attempt = self.active_attempt(self.sim.now)

        self.open_query(
            resolver_id,
            request.query,
            outstanding=self.params.vote_outstanding,
            attempt=attempt if resolver_id in self.victims else None,
            vote=request,
        )

    def on_vote_cast(self, event: SimEvent) -> None:
        self.nodes[event.payload["resolver"]].on_vote_notice(
            VoteNotice.from_payload(event.payload), self.sim.now
        )

    def on_block_cut(self, event: SimEvent) -> None:
        # a stale cut event finds a younger batch that is not due yet
        if self.orderer.tick(self.sim.now) is None:
            return

        if self.orderer.due_at is not None:
            self.sim.schedule_at(
                max(self.orderer.due_at, self.sim.now), EventKind.BLOCK_CUT
            )

    def on_block(self, block: Block) -> None:
        now = self.sim.now

        for tx, code in zip(block.transactions, block.validation_codes):
            if (node := self.nodes.get(tx.submitter)) is not None:
                node.on_committed(tx, code, now)

            if code != TxValidationCode.VALID:
                continue

            for event in tx.events:
                match event.name:
                    case name if name == EVENT_VALIDATION_REQUEST:
                        self.observe_request(event.payload)
                        kind = EventKind.VOTE_REQUEST
                    case name if name == EVENT_VOTE_NOTICE:
                        kind = EventKind.VOTE_CAST
                    case name if name == EVENT_RECORD_FINISHED:
                        self.observe_finish(event.payload)
                        continue
                    case _:
                        continue

                for recipient in event.recipients:
                    self.sim.schedule(
                        0.0, kind, {"resolver": recipient, **event.payload}
                    )

    def observe_request(self, payload: tt.EventPayload) -> None:
        if Query(payload["qname"], payload["qtype"]) != self.topology.target:
            return

        attempt = self.attempt_for_answer(payload["answer"])
        if attempt is not None:
            self.forged_requests[payload["vr_txid"]] = attempt

    def observe_finish(self, payload: tt.EventPayload) -> None:
        if payload["status"] != FinishStatus.VALIDATED.value:
            return

        attempt = self.forged_requests.get(payload["vr_txid"])
        if attempt is not None:
            LOG.info("Ledger accepted the forgery of attempt %d", attempt)
            self.accepted.add(attempt)

    def check_served(self, attempt: int, now: tt.TimeMs) -> None:
        forged = self.forged_answer(attempt)

        for resolver_id in sorted(self.poisoned.get(attempt, ())):
            response = self.nodes[resolver_id].peek(self.topology.target, now)
            if (
                response is not None
                and response.verified
                and response.answer is not None
                and response.answer.rrs == forged.rrs
            ):
                self.served.add(attempt)

    def stake_sample(self, attempt: int) -> StakeSample:
        stakes = self.ledger.participants()
        victims = set(self.topology.victims)

        return StakeSample(
            attempt_index=attempt,
            victim_stake=sum(
                stake for rid, stake in stakes.items() if rid in victims
            ),
            clean_stake=sum(
                stake for rid, stake in stakes.items() if rid not in victims
            ),
        )

    def outcome(self, attempt: int) -> AttackOutcome:
        return AttackOutcome(
            attempt_index=attempt,
            poisoned_resolvers=frozenset(self.poisoned.get(attempt, ())),
            ledger_accepted_forgery=attempt in self.accepted,
            client_served_forgery=attempt in self.served,
        )


def run_campaign(
    params: SimParams,
    incentive: IncentiveParams | None = None,
    *,
    topology: Topology | None = None,
    block_size: int = 10,
    block_interval_ms: tt.TimeMs = 500.0,
    record_trace: bool = False,
    stake_samples: int = 100,
) -> CampaignResult:
    network = TIDNSNetwork(
        params,
        incentive,
        topology=topology,
        block_size=block_size,
        block_interval_ms=block_interval_ms,
        record_trace=record_trace,
    )
    params = network.params
    sample_every = max(1, params.attempts // max(1, stake_samples))
    samples = []

    if params.attempts:
        network.schedule_genesis()
        samples.append(network.stake_sample(-1))

    outcomes = []

    for attempt in range(params.attempts):
        network.schedule_attempt(attempt)
        network.sim.run(until=network.attempt_time(attempt + 1))

        outcomes.append(network.outcome(attempt))
        network.poisoned.pop(attempt, None)

        if (attempt + 1) % sample_every == 0:
            samples.append(network.stake_sample(attempt))

    network.sim.run()

    result = CampaignResult(
        params=params,
        outcomes=tuple(outcomes),
        stake_samples=tuple(samples),
        state_root=network.ledger.state_root(),
        trace=tuple(network.sim.trace or ()),
        ledger=network.ledger,
    )
    LOG.info(
        "Campaign finished: %d of %d attempts accepted by the ledger",
        result.successes,
        result.attempts,
        extra={"fields": {"rate": result.rate, "seed": params.seed}},
    )

    return result


def run_event_loop(
    topology: Topology,
    params: SimParams,
    until: tt.TimeMs,
    incentive: IncentiveParams | None = None,
) -> list[SimEvent]:
    """Run every attempt that starts before until and return the trace."""

    network = TIDNSNetwork(
        params, incentive, topology=topology, record_trace=True
    )
    attempts = 0
    while (
        attempts < network.params.attempts
        and network.attempt_time(attempts) < until
    ):
        attempts += 1

    if attempts:
        network.schedule_genesis()
    for attempt in range(attempts):
        network.schedule_attempt(attempt)

    return network.sim.run(until=until)
