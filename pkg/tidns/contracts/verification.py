from __future__ import annotations

import dataclasses
import typing as t

from tidns.dnscore import Status
from tidns.dnscore import compare_record
from tidns.ledger import Namespace
from tidns.ledger import VerifiedRecordEntry


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.dnscore import Query
    from tidns.dnscore import RecordSet
    from tidns.ledger import Ledger
    from tidns.ledger import Transaction


@dataclasses.dataclass(frozen=True, kw_only=True)
class VerificationOutcome:
    result: Status
    update_txids: tuple[tt.TxID, ...] = ()
    previously_verified: RecordSet | None = None

    def __post_init__(self) -> None:
        if self.result == Status.VERIFIED and self.update_txids:
            raise ValueError("Verified outcome cannot carry update pointers")

    @property
    def verified(self) -> bool:
        return self.result == Status.VERIFIED


def iter_records(
    ledger: Ledger, query: Query, tx: Transaction | None = None
) -> t.Iterator[VerifiedRecordEntry]:
    for key, value in ledger.get_state_by_partial_composite_key(
        Namespace.VR, [query.qname, query.qtype.value], tx
    ):
        yield VerifiedRecordEntry.decode(key, value)


def find_record(
    ledger: Ledger,
    query: Query,
    vr_txid: tt.TxID,
    tx: Transaction | None = None,
) -> VerifiedRecordEntry | None:
    for entry in iter_records(ledger, query):
        if entry.tx_id == vr_txid:
            if tx is not None:
                ledger.get_state(entry.key, tx)
            return entry

    return None


def record_verification(
    ledger: Ledger,
    answer: RecordSet,
    resolver_id: tt.ResolverID,
    tx: Transaction | None = None,
) -> VerificationOutcome:
    """Check an authoritative answer against verified ledger records.

    Pending (unverified) entries never verify an answer. Entries with a
    different answer that the resolver created or validated are returned
    as update pointers.
    """

    update_txids = []
    previously_verified = None

    for entry in iter_records(ledger, answer.query, tx):
        if entry.state != Status.VERIFIED:
            continue

        if compare_record(entry.answer, answer) == Status.VERIFIED:
            return VerificationOutcome(result=Status.VERIFIED)

        if previously_verified is None:
            previously_verified = entry.answer
        if resolver_id == entry.creator_id or resolver_id in entry.val_ids:
            update_txids.append(entry.tx_id)

    return VerificationOutcome(
        result=Status.UNVERIFIED,
        update_txids=tuple(update_txids),
        previously_verified=previously_verified,
    )
