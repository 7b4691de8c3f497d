from __future__ import annotations

import dataclasses
import enum
import json
import typing as t

from tidns import utils
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet
from tidns.dnscore import Status
from tidns.ledger.keys import CompositeKey
from tidns.ledger.keys import Namespace
from tidns.ledger.keys import create_composite_key


if t.TYPE_CHECKING:
    import typing_extensions as te

    from tidns import types as tt


class VoteResult(enum.Enum):
    YES = "yes"
    NO = "no"

    @classmethod
    def from_status(cls, status: Status) -> te.Self:
        return cls.YES if status == Status.VERIFIED else cls.NO


def make_tmp(timestamp: tt.TimeMs, tx_id: tt.TxID, index: int) -> str:
    return f"{int(timestamp):015d}-{tx_id}-{index:03d}"


@dataclasses.dataclass(frozen=True, kw_only=True)
class VerifiedRecordEntry:
    query: Query
    tx_id: tt.TxID
    creator_id: tt.ResolverID
    answer: RecordSet
    state: Status
    update_txids: tuple[tt.TxID, ...] = ()
    val_ids: frozenset[tt.ResolverID] = frozenset()
    policy: int = 1
    apv_ids: frozenset[tt.ResolverID] = frozenset()

    def __post_init__(self) -> None:
        if self.answer.query != self.query:
            raise ValueError(f"Answer for {self.answer.query} under {self}")
        if not 1 <= self.policy <= len(self.val_ids):
            raise ValueError(
                f"Policy {self.policy} outside 1..{len(self.val_ids)}"
            )
        if not self.apv_ids <= self.val_ids:
            raise ValueError("Approvers are not a subset of validators")
        if self.creator_id in self.apv_ids:
            raise ValueError(f"Creator {self.creator_id} approved itself")
        if self.state == Status.VERIFIED and len(self.apv_ids) < self.policy:
            raise ValueError(
                f"Verified record has {len(self.apv_ids)} approvals, "
                f"policy is {self.policy}"
            )

    @property
    def key(self) -> CompositeKey:
        return self.make_key(self.query, self.tx_id, self.creator_id)

    @staticmethod
    def make_key(
        query: Query, tx_id: tt.TxID, creator_id: tt.ResolverID
    ) -> CompositeKey:
        return create_composite_key(
            Namespace.VR,
            [query.qname, query.qtype.value, tx_id, creator_id],
        )

    def to_value(self) -> tt.VerifiedRecordValueDoc:
        return {
            "answer": self.answer.sorted_rrs(),
            "state": self.state.value,
            "update_txIDs": list(self.update_txids),
            "val_IDs": sorted(self.val_ids),
            "policy": self.policy,
            "apv_IDs": sorted(self.apv_ids),
        }

    def encode(self) -> bytes:
        return utils.canonical_json(self.to_value())

    def replace(self, **changes: t.Any) -> te.Self:
        return dataclasses.replace(self, **changes)

    @classmethod
    def decode(cls, key: CompositeKey, value: bytes) -> te.Self:
        qname, qtype, tx_id, creator_id = key.attributes
        doc: tt.VerifiedRecordValueDoc = json.loads(value)
        query = Query(qname, QType.parse(qtype))

        return cls(
            query=query,
            tx_id=tx_id,
            creator_id=creator_id,
            answer=RecordSet.create(query, doc["answer"]),
            state=Status(doc["state"]),
            update_txids=tuple(doc["update_txIDs"]),
            val_ids=frozenset(doc["val_IDs"]),
            policy=doc["policy"],
            apv_ids=frozenset(doc["apv_IDs"]),
        )


@dataclasses.dataclass(frozen=True, kw_only=True)
class VoteEntry:
    voter_id: tt.ResolverID
    vr_txid: tt.TxID
    result: VoteResult

    @property
    def key(self) -> CompositeKey:
        return self.make_key(self.voter_id, self.vr_txid)

    @staticmethod
    def make_key(voter_id: tt.ResolverID, vr_txid: tt.TxID) -> CompositeKey:
        return create_composite_key(Namespace.VOTE, [voter_id, vr_txid])

    def to_value(self) -> tt.VoteValueDoc:
        return {"result": self.result.value}

    def encode(self) -> bytes:
        return utils.canonical_json(self.to_value())

    @classmethod
    def decode(cls, key: CompositeKey, value: bytes) -> te.Self:
        voter_id, vr_txid = key.attributes
        doc: tt.VoteValueDoc = json.loads(value)

        return cls(
            voter_id=voter_id,
            vr_txid=vr_txid,
            result=VoteResult(doc["result"]),
        )


@dataclasses.dataclass(frozen=True, kw_only=True)
class StakeDelta:
    resolver_id: tt.ResolverID
    tmp: str
    delta: tt.Stake

    @property
    def key(self) -> CompositeKey:
        return create_composite_key(
            Namespace.TOKEN_OP, [self.resolver_id, self.tmp]
        )

    def to_value(self) -> tt.StakeValueDoc:
        return {"delta": self.delta}

    def encode(self) -> bytes:
        return utils.canonical_json(self.to_value())

    @classmethod
    def decode(cls, key: CompositeKey, value: bytes) -> te.Self:
        resolver_id, tmp = key.attributes
        doc: tt.StakeValueDoc = json.loads(value)

        return cls(resolver_id=resolver_id, tmp=tmp, delta=int(doc["delta"]))


def key_to_document(key: CompositeKey) -> dict[str, t.Any]:
    match key.namespace:
        case Namespace.VR:
            qname, qtype, tx_id, creator_id = key.attributes
            return {
                "query": {"qname": qname, "qtype": qtype},
                "txID": tx_id,
                "creator_ID": creator_id,
            }
        case Namespace.VOTE:
            voter_id, vr_txid = key.attributes
            return {"voter_ID": voter_id, "VR_txID": vr_txid}
        case Namespace.TOKEN_OP:
            resolver_id, tmp = key.attributes
            return {"ID": resolver_id, "tmp": tmp}

    raise RuntimeError(f"Unknown namespace {key.namespace}")


def key_from_document(
    namespace: Namespace, doc: dict[str, t.Any]
) -> CompositeKey:
    match namespace:
        case Namespace.VR:
            attributes = [
                doc["query"]["qname"],
                doc["query"]["qtype"],
                doc["txID"],
                doc["creator_ID"],
            ]
        case Namespace.VOTE:
            attributes = [doc["voter_ID"], doc["VR_txID"]]
        case Namespace.TOKEN_OP:
            attributes = [doc["ID"], doc["tmp"]]

    return create_composite_key(namespace, attributes)
