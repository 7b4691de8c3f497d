from __future__ import annotations

import datetime
import typing as t


ResolverID: t.TypeAlias = str
TxID: t.TypeAlias = str

Stake: t.TypeAlias = int

TimeMs: t.TypeAlias = float
TimeSeconds: t.TypeAlias = int | float

Version: t.TypeAlias = tuple[int, int]
Seed: t.TypeAlias = int

EventPayload: t.TypeAlias = dict[str, t.Any]


class VerifiedRecordValueDoc(t.TypedDict):
    answer: list[str]
    state: str
    update_txIDs: list[TxID]
    val_IDs: list[ResolverID]
    policy: int
    apv_IDs: list[ResolverID]


class VoteValueDoc(t.TypedDict):
    result: str


class StakeValueDoc(t.TypedDict):
    delta: Stake


class ValidationRequestDoc(t.TypedDict):
    qname: str
    qtype: str
    answer: list[str]
    vr_txid: TxID


class VoteNoticeDoc(t.TypedDict):
    vr_txid: TxID
    voter_id: ResolverID
    result: str


class SnapshotMetadata(t.TypedDict):
    created_at: datetime.datetime
    height: int
    state_root: str
    class_: str
