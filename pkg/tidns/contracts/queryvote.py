from __future__ import annotations

import dataclasses
import enum
import logging
import typing as t

from tidns import exceptions
from tidns import utils
from tidns.contracts.incentives import apply_incentives
from tidns.contracts.incentives import charge_fee
from tidns.contracts.incentives import check_submission_allowed
from tidns.contracts.selection import eligible_participants
from tidns.contracts.selection import voter_selection
from tidns.contracts.verification import find_record
from tidns.contracts.verification import iter_records
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet
from tidns.dnscore import Status
from tidns.dnscore import compare_record
from tidns.ledger import VerifiedRecordEntry
from tidns.ledger import VoteEntry
from tidns.ledger import VoteResult


if t.TYPE_CHECKING:
    import typing_extensions as te

    from tidns import types as tt
    from tidns.contracts.params import IncentiveParams
    from tidns.ledger import Ledger
    from tidns.ledger import Transaction

    Lookup = t.Callable[[Query], RecordSet | None]


LOG = logging.getLogger(__name__)

EVENT_VALIDATION_REQUEST = "ValidationRequest"
EVENT_VOTE_NOTICE = "VoteNotice"
EVENT_RECORD_FINISHED = "RecordFinished"

FN_CREATE_OR_UPDATE = "CreateOrUpdate"
FN_VOTE = "Vote"
FN_FINISH = "FinishValidation"
FN_GENESIS = "Genesis"


@dataclasses.dataclass(frozen=True, kw_only=True)
class ValidationRequest:
    query: Query
    answer: RecordSet
    vr_txid: tt.TxID

    def to_payload(self) -> tt.ValidationRequestDoc:
        return {
            "qname": self.query.qname,
            "qtype": self.query.qtype.value,
            "answer": self.answer.sorted_rrs(),
            "vr_txid": self.vr_txid,
        }

    @classmethod
    def from_payload(cls, payload: tt.EventPayload) -> te.Self:
        query = Query(payload["qname"], QType.parse(payload["qtype"]))

        return cls(
            query=query,
            answer=RecordSet.create(query, payload["answer"]),
            vr_txid=payload["vr_txid"],
        )


@dataclasses.dataclass(frozen=True, kw_only=True)
class VoteNotice:
    vr_txid: tt.TxID
    voter_id: tt.ResolverID
    result: VoteResult

    def to_payload(self) -> tt.VoteNoticeDoc:
        return {
            "vr_txid": self.vr_txid,
            "voter_id": self.voter_id,
            "result": self.result.value,
        }

    @classmethod
    def from_payload(cls, payload: tt.EventPayload) -> te.Self:
        return cls(
            vr_txid=payload["vr_txid"],
            voter_id=payload["voter_id"],
            result=VoteResult(payload["result"]),
        )


class FinishStatus(enum.Enum):
    VALIDATED = "validated"
    REJECTED_TIMEOUT = "rejected_timeout"
    REJECTED_VOTES = "rejected_votes"
    NOOP = "noop"


@dataclasses.dataclass(frozen=True, kw_only=True)
class FinishResult:
    status: FinishStatus
    vr_txid: tt.TxID
    approvers: frozenset[tt.ResolverID] = frozenset()
    disapprovers: frozenset[tt.ResolverID] = frozenset()
    rewarded: tuple[tt.ResolverID, ...] = ()
    deleted: tuple[tt.TxID, ...] = ()


def create_or_update_record(
    ledger: Ledger,
    answer: RecordSet,
    resolver_id: tt.ResolverID,
    update_txids: t.Sequence[tt.TxID],
    params: IncentiveParams,
    *,
    seed: tt.Seed,
    timestamp: tt.TimeMs,
) -> tuple[Transaction, ValidationRequest]:
    if answer.negative:
        raise ValueError(f"Negative answer for {answer.query} is not stored")

    if not check_submission_allowed(ledger, resolver_id, params):
        raise exceptions.SubmissionProhibitedError(
            resolver_id,
            ledger.aggregate_stake(resolver_id),
            params.required_stake,
        )

    tx = ledger.begin(resolver_id, timestamp, FN_CREATE_OR_UPDATE)
    charge_fee(ledger, tx, resolver_id, params.submission_fee)

    voters = voter_selection(
        params.voters_n,
        eligible_participants(ledger, resolver_id),
        utils.derive_generator(seed, tx.tx_id),
    )
    entry = VerifiedRecordEntry(
        query=answer.query,
        tx_id=tx.tx_id,
        creator_id=resolver_id,
        answer=answer,
        state=Status.UNVERIFIED,
        update_txids=tuple(update_txids),
        val_ids=frozenset(voters),
        policy=params.policy(len(voters)),
    )
    ledger.put_state(tx, entry.key, entry.encode())

    request = ValidationRequest(
        query=answer.query, answer=answer, vr_txid=tx.tx_id
    )
    tx.emit(EVENT_VALIDATION_REQUEST, dict(request.to_payload()), voters)

    LOG.debug(
        "%s asks %s to validate %s in %s",
        resolver_id,
        ",".join(voters),
        answer.query,
        tx.tx_id,
    )

    return tx, request


def cast_vote(
    ledger: Ledger,
    voter_id: tt.ResolverID,
    request: ValidationRequest,
    lookup: Lookup,
    *,
    timestamp: tt.TimeMs,
) -> tuple[Transaction, VoteEntry]:
    tx = ledger.begin(voter_id, timestamp, FN_VOTE)

    entry = find_record(ledger, request.query, request.vr_txid, tx)
    if entry is None or entry.state != Status.UNVERIFIED:
        raise exceptions.RecordNotPendingError(request.vr_txid)
    if voter_id not in entry.val_ids:
        raise exceptions.NotAValidatorError(voter_id, request.vr_txid)

    vote_key = VoteEntry.make_key(voter_id, request.vr_txid)
    if ledger.get_state(vote_key, tx) is not None:
        raise exceptions.DuplicateVoteError(voter_id, request.vr_txid)

    observed = lookup(request.query)
    if observed is None or observed.negative:
        result = VoteResult.NO
    else:
        result = VoteResult.from_status(compare_record(entry.answer, observed))

    vote = VoteEntry(voter_id=voter_id, vr_txid=request.vr_txid, result=result)
    ledger.put_state(tx, vote.key, vote.encode())

    notice = VoteNotice(
        vr_txid=request.vr_txid, voter_id=voter_id, result=result
    )
    tx.emit(EVENT_VOTE_NOTICE, dict(notice.to_payload()), [entry.creator_id])

    return tx, vote


def finish_validation(
    ledger: Ledger,
    creator_id: tt.ResolverID,
    request: ValidationRequest,
    votes: t.Iterable[VoteNotice],
    params: IncentiveParams,
    *,
    timestamp: tt.TimeMs,
) -> tuple[Transaction | None, FinishResult]:
    """Close a Query Vote round.

    Only collected votes that match the Vote ledger are counted; missing
    votes are abstentions. A round that is already closed returns NOOP
    without a transaction.
    """

    tx = ledger.begin(creator_id, timestamp, FN_FINISH)

    entry = find_record(ledger, request.query, request.vr_txid, tx)
    if entry is None or entry.state == Status.VERIFIED:
        return None, FinishResult(
            status=FinishStatus.NOOP, vr_txid=request.vr_txid
        )
    if entry.creator_id != creator_id:
        raise exceptions.NotTheCreatorError(creator_id, request.vr_txid)

    approvers: set[tt.ResolverID] = set()
    disapprovers: set[tt.ResolverID] = set()

    for notice in sorted(votes, key=lambda item: item.voter_id):
        if (
            notice.vr_txid != entry.tx_id
            or notice.voter_id not in entry.val_ids
        ):
            continue

        value = ledger.get_state(
            VoteEntry.make_key(notice.voter_id, entry.tx_id), tx
        )
        if value is None:
            LOG.warning(
                "Vote of %s on %s is not on the ledger",
                notice.voter_id,
                entry.tx_id,
            )
            continue

        vote = VoteEntry.decode(
            VoteEntry.make_key(notice.voter_id, entry.tx_id), value
        )
        if vote.result != notice.result:
            LOG.warning(
                "Vote of %s on %s differs from the ledger",
                notice.voter_id,
                entry.tx_id,
            )
        if vote.result == VoteResult.YES:
            approvers.add(vote.voter_id)
        else:
            disapprovers.add(vote.voter_id)

    if len(approvers) >= entry.policy:
        deleted = []
        for stale in iter_records(ledger, entry.query):
            if stale.tx_id in entry.update_txids:
                ledger.delete_state(tx, stale.key)
                deleted.append(stale.tx_id)

        verified = entry.replace(
            state=Status.VERIFIED, apv_ids=frozenset(approvers)
        )
        ledger.put_state(tx, verified.key, verified.encode())

        winners = {creator_id, *approvers}
        apply_incentives(ledger, tx, winners, params.reward)
        result = FinishResult(
            status=FinishStatus.VALIDATED,
            vr_txid=entry.tx_id,
            approvers=frozenset(approvers),
            disapprovers=frozenset(disapprovers),
            rewarded=tuple(sorted(winners)),
            deleted=tuple(deleted),
        )
    else:
        ledger.delete_state(tx, entry.key)

        if disapprovers:
            apply_incentives(ledger, tx, disapprovers, params.reward)
        result = FinishResult(
            status=(
                FinishStatus.REJECTED_VOTES
                if approvers or disapprovers
                else FinishStatus.REJECTED_TIMEOUT
            ),
            vr_txid=entry.tx_id,
            approvers=frozenset(approvers),
            disapprovers=frozenset(disapprovers),
            rewarded=tuple(sorted(disapprovers)),
        )

    tx.emit(
        EVENT_RECORD_FINISHED,
        {"vr_txid": entry.tx_id, "status": result.status.value},
    )

    return tx, result


def seed_verified_record(
    ledger: Ledger,
    answer: RecordSet,
    creator_id: tt.ResolverID,
    approvers: t.Iterable[tt.ResolverID],
    *,
    timestamp: tt.TimeMs = 0.0,
) -> Transaction:
    """Write an already verified record without fees or rewards."""

    tx = ledger.begin(creator_id, timestamp, FN_GENESIS)
    validators = frozenset(approvers) - {creator_id}

    entry = VerifiedRecordEntry(
        query=answer.query,
        tx_id=tx.tx_id,
        creator_id=creator_id,
        answer=answer,
        state=Status.VERIFIED,
        val_ids=validators,
        policy=len(validators) // 2 + 1,
        apv_ids=validators,
    )
    ledger.put_state(tx, entry.key, entry.encode())

    return tx
