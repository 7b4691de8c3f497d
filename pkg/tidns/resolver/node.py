from __future__ import annotations

import dataclasses
import logging
import threading
import time
import typing as t

from tidns import exceptions
from tidns.contracts import FinishStatus
from tidns.contracts import ValidationRequest
from tidns.contracts import VoteNotice
from tidns.contracts import cast_vote
from tidns.contracts import create_or_update_record
from tidns.contracts import finish_validation
from tidns.contracts import record_verification
from tidns.contracts.queryvote import FN_CREATE_OR_UPDATE
from tidns.contracts.queryvote import FN_FINISH
from tidns.dnscore import Rcode
from tidns.dnscore import RecordCache
from tidns.dnscore import Status
from tidns.ledger import TxValidationCode


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.contracts import IncentiveParams
    from tidns.contracts import VerificationOutcome
    from tidns.dnscore import Query
    from tidns.dnscore import RecordSet
    from tidns.ledger import Ledger
    from tidns.ledger import Transaction


LOG = logging.getLogger(__name__)


class Upstream(t.Protocol):
    def resolve(self, query: Query, now: tt.TimeMs) -> RecordSet:
        ...


class Host(t.Protocol):
    """What a node needs from the network it runs in."""

    def submit(self, tx: Transaction) -> None:
        ...

    def call_later(
        self,
        delay_ms: tt.TimeMs,
        callback: t.Callable[[tt.TimeMs], None],
        *,
        kind: str,
    ) -> None:
        ...


@dataclasses.dataclass(frozen=True, kw_only=True)
class ClientResponse:
    query: Query
    answer: RecordSet | None
    status: Status
    previously_verified: RecordSet | None = None
    rcode: Rcode = Rcode.NOERROR
    submitted: bool = False
    from_cache: bool = False

    def __post_init__(self) -> None:
        if self.status == Status.VERIFIED and self.previously_verified:
            raise ValueError("Verified response carries a previous record")

    @property
    def verified(self) -> bool:
        return self.status == Status.VERIFIED


@dataclasses.dataclass(kw_only=True)
class PendingValidation:
    request: ValidationRequest
    voters: frozenset[tt.ResolverID]
    votes: dict[tt.ResolverID, VoteNotice] = dataclasses.field(
        default_factory=dict
    )
    open: bool = False
    finish_txid: tt.TxID | None = None


class ResolverNode:
    """A verifying recursive resolver.

    The resolution path is split in two halves so an event loop can put
    the upstream exchange (and an attacker racing it) in between.
    """

    identity: tt.ResolverID
    ledger: Ledger
    params: IncentiveParams
    upstream: Upstream
    host: Host
    seed: tt.Seed
    verified_cache: RecordCache
    upstream_cache: RecordCache
    pending: dict[tt.TxID, PendingValidation]
    in_flight: dict[tuple[Query, frozenset[str]], tt.TxID]
    upstream_attempts: int
    resolution_log_level: int
    lock: threading.RLock

    def __init__(
        self,
        identity: tt.ResolverID,
        *,
        ledger: Ledger,
        params: IncentiveParams,
        upstream: Upstream,
        host: Host,
        seed: tt.Seed = 0,
        upstream_attempts: int = 2,
        resolution_log_level: int = logging.DEBUG,
    ) -> None:
        self.identity = identity
        self.ledger = ledger
        self.params = params
        self.upstream = upstream
        self.host = host
        self.seed = seed
        self.verified_cache = RecordCache()
        self.upstream_cache = RecordCache()
        self.pending = {}
        self.in_flight = {}
        self.upstream_attempts = upstream_attempts
        self.resolution_log_level = resolution_log_level
        self.lock = threading.RLock()

    def __repr__(self) -> str:
        return f"<ResolverNode {self.identity}>"

    def enroll(self) -> None:
        if not self.ledger.is_enrolled(self.identity):
            self.ledger.enroll(self.identity, self.params.initial_stake)

    def resolve_query(self, query: Query, now: tt.TimeMs) -> ClientResponse:
        if (cached := self.begin_resolution(query, now)) is not None:
            return cached

        started = time.monotonic_ns()
        try:
            answer = self.fetch_upstream(query, now)
        except exceptions.UpstreamTimeoutError as exc:
            LOG.warning("%s cannot resolve %s: %s", self.identity, query, exc)
            return ClientResponse(
                query=query,
                answer=None,
                status=Status.UNVERIFIED,
                rcode=Rcode.SERVFAIL,
            )

        return self.complete_resolution(
            answer, now, upstream_ms=(time.monotonic_ns() - started) / 1e6
        )

    def fetch_upstream(self, query: Query, now: tt.TimeMs) -> RecordSet:
        last_error: exceptions.UpstreamTimeoutError | None = None

        for _ in range(self.upstream_attempts):
            try:
                return self.upstream.resolve(query, now)
            except exceptions.UpstreamTimeoutError as exc:
                last_error = exc

        raise exceptions.UpstreamTimeoutError(
            query.qname, self.upstream_attempts
        ) from last_error

    def begin_resolution(
        self, query: Query, now: tt.TimeMs
    ) -> ClientResponse | None:
        cached = self.verified_cache.get(query, now)
        if cached is None:
            return None

        response = ClientResponse(
            query=query,
            answer=cached,
            status=Status.VERIFIED,
            from_cache=True,
        )
        self.log_resolution(response, 0.0, 0.0)

        return response

    def complete_resolution(
        self,
        answer: RecordSet,
        now: tt.TimeMs,
        *,
        upstream_ms: float = 0.0,
        submit: bool = True,
    ) -> ClientResponse:
        self.upstream_cache.put(answer, now)

        if answer.negative:
            response = ClientResponse(
                query=answer.query,
                answer=answer,
                status=Status.UNVERIFIED,
                rcode=Rcode.NXDOMAIN,
            )
            self.log_resolution(response, upstream_ms, 0.0)
            return response

        started = time.monotonic_ns()
        try:
            outcome = record_verification(self.ledger, answer, self.identity)
        except exceptions.LedgerUnavailableError as exc:
            LOG.warning(
                "%s serves %s unverified in degraded mode: %s",
                self.identity,
                answer.query,
                exc,
            )
            response = ClientResponse(
                query=answer.query, answer=answer, status=Status.UNVERIFIED
            )
            self.log_resolution(response, upstream_ms, 0.0)
            return response

        ledger_ms = (time.monotonic_ns() - started) / 1e6

        if outcome.verified:
            self.verified_cache.put(answer, now)
            response = ClientResponse(
                query=answer.query, answer=answer, status=Status.VERIFIED
            )
        else:
            response = ClientResponse(
                query=answer.query,
                answer=answer,
                status=Status.UNVERIFIED,
                previously_verified=outcome.previously_verified,
                submitted=submit and self.submit_record(answer, outcome, now),
            )

        self.log_resolution(response, upstream_ms, ledger_ms)

        return response

    def peek(self, query: Query, now: tt.TimeMs) -> ClientResponse | None:
        """What a client would be served now, without side effects."""

        if (cached := self.verified_cache.get(query, now)) is not None:
            return ClientResponse(
                query=query,
                answer=cached,
                status=Status.VERIFIED,
                from_cache=True,
            )

        answer = self.upstream_cache.get(query, now)
        if answer is None or answer.negative:
            return None

        outcome = record_verification(self.ledger, answer, self.identity)
        if outcome.verified:
            return ClientResponse(
                query=query, answer=answer, status=Status.VERIFIED
            )

        return ClientResponse(
            query=query,
            answer=answer,
            status=Status.UNVERIFIED,
            previously_verified=outcome.previously_verified,
        )

    def submit_record(
        self,
        answer: RecordSet,
        outcome: VerificationOutcome,
        now: tt.TimeMs,
    ) -> bool:
        flight_key = (answer.query, answer.rrs)

        with self.lock:
            if flight_key in self.in_flight:
                return False

            try:
                tx, request = create_or_update_record(
                    self.ledger,
                    answer,
                    self.identity,
                    outcome.update_txids,
                    self.params,
                    seed=self.seed,
                    timestamp=now,
                )
            except exceptions.SubmissionProhibitedError as exc:
                LOG.debug("%s", exc)
                return False
            except exceptions.VoterSelectionError as exc:
                LOG.warning(
                    "%s cannot submit %s: %s", self.identity, answer.query, exc
                )
                return False

            self.in_flight[flight_key] = request.vr_txid
            self.pending[request.vr_txid] = PendingValidation(
                request=request, voters=frozenset(tx.events[0].recipients)
            )

        self.host.submit(tx)

        return True

    def lookup_for_vote(
        self, query: Query, now: tt.TimeMs
    ) -> RecordSet | None:
        if not self.params.fresh_vote_lookup:
            cached = self.upstream_cache.get(query, now)
            if cached is not None:
                return cached

        try:
            answer = self.fetch_upstream(query, now)
        except exceptions.UpstreamTimeoutError as exc:
            LOG.warning("%s votes without an answer: %s", self.identity, exc)
            return None

        self.upstream_cache.put(answer, now)

        return answer

    def on_validation_request(
        self,
        request: ValidationRequest,
        now: tt.TimeMs,
        *,
        answer: RecordSet | None = None,
    ) -> None:
        """Vote on a request.

        With answer given, the vote compares against it instead of looking
        the question up here; the simulated network delivers its own
        upstream exchange this way.
        """

        if answer is not None:
            self.upstream_cache.put(answer, now)

        try:
            tx, vote = cast_vote(
                self.ledger,
                self.identity,
                request,
                lambda query: (
                    answer
                    if answer is not None
                    else self.lookup_for_vote(query, now)
                ),
                timestamp=now,
            )
        except exceptions.ContractError as exc:
            LOG.debug("%s does not vote: %s", self.identity, exc)
            return

        LOG.debug(
            "%s votes %s on %s",
            self.identity,
            vote.result.value,
            request.vr_txid,
        )
        self.host.submit(tx)

    def on_vote_notice(self, notice: VoteNotice, now: tt.TimeMs) -> None:
        with self.lock:
            pending = self.pending.get(notice.vr_txid)
            if pending is None or pending.finish_txid is not None:
                return

            pending.votes[notice.voter_id] = notice
            collected = pending.voters <= pending.votes.keys()

        if collected:
            self.finalize(notice.vr_txid, now)

    def on_committed(
        self, tx: Transaction, code: TxValidationCode, now: tt.TimeMs
    ) -> None:
        if tx.function == FN_CREATE_OR_UPDATE:
            self.on_create_committed(tx.tx_id, code)
        elif tx.function == FN_FINISH:
            self.on_finish_committed(tx, code, now)

    def on_create_committed(
        self, vr_txid: tt.TxID, code: TxValidationCode
    ) -> None:
        with self.lock:
            pending = self.pending.get(vr_txid)
            if pending is None:
                return

            if code != TxValidationCode.VALID:
                self.forget(vr_txid)
                return

            pending.open = True

        self.host.call_later(
            self.params.grace_period_ms,
            lambda when: self.finalize(vr_txid, when),
            kind="finalize",
        )

    def on_finish_committed(
        self, tx: Transaction, code: TxValidationCode, now: tt.TimeMs
    ) -> None:
        vr_txid = next(
            (
                event.payload["vr_txid"]
                for event in tx.events
                if "vr_txid" in event.payload
            ),
            None,
        )
        if vr_txid is None:
            return

        if code == TxValidationCode.VALID:
            with self.lock:
                self.forget(vr_txid)
            return

        LOG.warning(
            "%s retries to finish %s after %s",
            self.identity,
            vr_txid,
            code.value,
        )
        self.finalize(vr_txid, now, retry=True)

    def finalize(
        self, vr_txid: tt.TxID, now: tt.TimeMs, *, retry: bool = False
    ) -> None:
        with self.lock:
            pending = self.pending.get(vr_txid)
            if pending is None or not pending.open:
                return
            if pending.finish_txid is not None and not retry:
                return

            try:
                tx, result = finish_validation(
                    self.ledger,
                    self.identity,
                    pending.request,
                    list(pending.votes.values()),
                    self.params,
                    timestamp=now,
                )
            except exceptions.LedgerError as exc:
                LOG.warning(
                    "%s cannot finish %s: %s", self.identity, vr_txid, exc
                )
                return

            if tx is None or result.status == FinishStatus.NOOP:
                self.forget(vr_txid)
                return

            pending.finish_txid = tx.tx_id

        LOG.debug(
            "%s finishes %s as %s", self.identity, vr_txid, result.status.value
        )
        self.host.submit(tx)

    def forget(self, vr_txid: tt.TxID) -> None:
        pending = self.pending.pop(vr_txid, None)
        if pending is None:
            return

        request = pending.request
        self.in_flight.pop((request.query, request.answer.rrs), None)

    def log_resolution(
        self, response: ClientResponse, upstream_ms: float, ledger_ms: float
    ) -> None:
        if not LOG.isEnabledFor(self.resolution_log_level):
            return

        LOG.log(
            self.resolution_log_level,
            "%s resolved %s as %s",
            self.identity,
            response.query,
            response.status.value,
            extra={
                "fields": {
                    "resolver": self.identity,
                    "qname": response.query.qname,
                    "qtype": response.query.qtype.value,
                    "status": response.status.value,
                    "upstream_ms": round(upstream_ms, 3),
                    "ledger_ms": round(ledger_ms, 3),
                    "submitted": response.submitted,
                }
            },
        )
