from __future__ import annotations

import collections
import dataclasses
import enum
import hashlib
import itertools
import json
import logging
import threading
import typing as t

from tidns import exceptions
from tidns import utils
from tidns.ledger.keys import CompositeKey
from tidns.ledger.keys import Namespace
from tidns.ledger.keys import encode_prefix
from tidns.ledger.models import key_from_document
from tidns.ledger.models import key_to_document


if t.TYPE_CHECKING:
    import typing_extensions as te

    from tidns import types as tt


LOG = logging.getLogger(__name__)

BlockListener = t.Callable[["Block"], None]


class TxValidationCode(enum.Enum):
    VALID = "VALID"
    MVCC_READ_CONFLICT = "MVCC_READ_CONFLICT"
    DUPLICATE_TXID = "DUPLICATE_TXID"
    STAKE_OVERDRAWN = "STAKE_OVERDRAWN"


@dataclasses.dataclass(frozen=True, kw_only=True)
class Event:
    name: str
    payload: tt.EventPayload
    recipients: tuple[tt.ResolverID, ...] = ()


@dataclasses.dataclass(frozen=True, slots=True)
class StateRow:
    key: CompositeKey
    value: bytes
    version: tt.Version


@dataclasses.dataclass(eq=False, kw_only=True)
class Transaction:
    tx_id: tt.TxID
    submitter: tt.ResolverID
    timestamp: tt.TimeMs
    function: str = ""
    read_set: list[tuple[CompositeKey, tt.Version | None]] = dataclasses.field(
        default_factory=list
    )
    write_set: dict[CompositeKey, bytes | None] = dataclasses.field(
        default_factory=dict
    )
    events: list[Event] = dataclasses.field(default_factory=list)
    sealed: bool = False

    def __str__(self) -> str:
        return f"{self.function or 'tx'}[{self.tx_id}]"

    def check_open(self) -> None:
        if self.sealed:
            raise exceptions.TransactionClosedError(self.tx_id)

    def record_read(
        self, key: CompositeKey, version: tt.Version | None
    ) -> None:
        self.check_open()
        self.read_set.append((key, version))

    def write(self, key: CompositeKey, value: bytes | None) -> None:
        self.check_open()

        if key in self.write_set:
            raise exceptions.DuplicateWriteError(self.tx_id, str(key))

        self.write_set[key] = value

    def emit(
        self,
        name: str,
        payload: tt.EventPayload,
        recipients: t.Iterable[tt.ResolverID] = (),
    ) -> None:
        self.check_open()
        self.events.append(
            Event(name=name, payload=payload, recipients=tuple(recipients))
        )

    def seal(self) -> te.Self:
        self.sealed = True
        return self


@dataclasses.dataclass(frozen=True, kw_only=True)
class Block:
    height: int
    transactions: tuple[Transaction, ...]
    validation_codes: tuple[TxValidationCode, ...]

    @property
    def valid_flags(self) -> tuple[bool, ...]:
        return tuple(
            code == TxValidationCode.VALID for code in self.validation_codes
        )

    def invalid_transactions(
        self,
    ) -> t.Iterator[tuple[Transaction, TxValidationCode]]:
        for tx, code in zip(self.transactions, self.validation_codes):
            if code != TxValidationCode.VALID:
                yield tx, code


class Ledger:
    """In-process world state with a serial MVCC commit pipeline.

    Endorsement (reads through a transaction, buffered writes) may happen
    from many threads; commit_block is serialized by a reentrant lock.
    """

    height: int
    states: dict[bytes, StateRow]
    tombstones: dict[bytes, tt.Version]
    buckets: collections.defaultdict[tuple[Namespace, str], set[bytes]]
    enrolled: dict[tt.ResolverID, tt.Stake]
    stake_totals: collections.Counter[tt.ResolverID]
    tx_ids: set[tt.TxID]
    tx_counter: t.Iterator[int]
    listeners: list[BlockListener]
    lock: threading.RLock
    event_offline: threading.Event

    def __init__(self) -> None:
        self.height = 0
        self.states = {}
        self.tombstones = {}
        self.buckets = collections.defaultdict(set)
        self.enrolled = {}
        self.stake_totals = collections.Counter()
        self.tx_ids = set()
        self.tx_counter = itertools.count()
        self.listeners = []
        self.lock = threading.RLock()
        self.event_offline = threading.Event()

    def set_online(self, online: bool) -> None:
        if online:
            self.event_offline.clear()
        else:
            self.event_offline.set()

        LOG.info("Ledger is %s", "online" if online else "offline")

    def check_available(self) -> None:
        if self.event_offline.is_set():
            raise exceptions.LedgerUnavailableError("ledger is offline")

    def subscribe(self, listener: BlockListener) -> None:
        self.listeners.append(listener)

    def enroll(
        self, resolver_id: tt.ResolverID, initial_stake: tt.Stake
    ) -> None:
        if initial_stake < 0:
            raise ValueError(f"Negative initial stake for {resolver_id}")

        with self.lock:
            self.enrolled[resolver_id] = initial_stake

        LOG.debug("Enrolled %s with stake %d", resolver_id, initial_stake)

    def is_enrolled(self, resolver_id: tt.ResolverID) -> bool:
        return resolver_id in self.enrolled

    def aggregate_stake(self, resolver_id: tt.ResolverID) -> tt.Stake:
        with self.lock:
            return (
                self.enrolled.get(resolver_id, 0)
                + self.stake_totals[resolver_id]
            )

    def participants(self) -> dict[tt.ResolverID, tt.Stake]:
        with self.lock:
            return {
                resolver_id: self.aggregate_stake(resolver_id)
                for resolver_id in sorted(self.enrolled)
            }

    def begin(
        self,
        submitter: tt.ResolverID,
        timestamp: tt.TimeMs,
        function: str = "",
    ) -> Transaction:
        self.check_available()

        with self.lock:
            counter = next(self.tx_counter)

        digest = hashlib.sha256(
            f"{counter}:{submitter}:{timestamp!r}:{function}".encode("utf-8")
        )

        return Transaction(
            tx_id=digest.hexdigest()[:24],
            submitter=submitter,
            timestamp=timestamp,
            function=function,
        )

    def current_version(self, key: CompositeKey) -> tt.Version | None:
        row = self.states.get(key.raw)
        if row is not None:
            return row.version

        return self.tombstones.get(key.raw)

    def get_state(
        self, key: CompositeKey, tx: Transaction | None = None
    ) -> bytes | None:
        self.check_available()

        with self.lock:
            row = self.states.get(key.raw)
            version = self.current_version(key)

        if tx is not None:
            tx.record_read(key, version)

        return None if row is None else row.value

    def put_state(
        self, tx: Transaction, key: CompositeKey, value: bytes
    ) -> None:
        tx.write(key, value)

    def delete_state(self, tx: Transaction, key: CompositeKey) -> None:
        tx.write(key, None)

    def get_state_by_partial_composite_key(
        self,
        namespace: Namespace,
        prefix: t.Sequence[str],
        tx: Transaction | None = None,
    ) -> t.Iterator[tuple[CompositeKey, bytes]]:
        self.check_available()
        raw_prefix = encode_prefix(namespace, prefix)

        with self.lock:
            bucket = self.buckets.get((namespace, prefix[0]), ())
            rows = sorted(
                (
                    self.states[raw]
                    for raw in bucket
                    if raw.startswith(raw_prefix)
                ),
                key=lambda row: row.key.raw,
            )

        for row in rows:
            if tx is not None:
                tx.record_read(row.key, row.version)
            yield row.key, row.value

    def iter_states(
        self, namespace: Namespace | None = None
    ) -> t.Iterator[StateRow]:
        with self.lock:
            rows = sorted(self.states.values(), key=lambda row: row.key.raw)

        for row in rows:
            if namespace is None or row.key.namespace == namespace:
                yield row

    def iter_tombstones(self) -> t.Iterator[tuple[CompositeKey, tt.Version]]:
        with self.lock:
            deleted = sorted(self.tombstones.items())

        for raw, version in deleted:
            yield CompositeKey.decode(raw), version

    def commit_block(self, pending: t.Sequence[Transaction]) -> Block:
        with self.lock:
            height = self.height + 1
            codes = []

            for index, tx in enumerate(pending):
                tx.seal()
                code = self.validate(tx)
                codes.append(code)

                if code == TxValidationCode.VALID:
                    self.apply(tx, (height, index))
                    self.tx_ids.add(tx.tx_id)
                else:
                    LOG.warning(
                        "Transaction %s from %s is invalid: %s",
                        tx,
                        tx.submitter,
                        code.value,
                    )

            self.height = height
            block = Block(
                height=height,
                transactions=tuple(pending),
                validation_codes=tuple(codes),
            )

        LOG.debug(
            "Committed block %d with %d transactions", height, len(pending)
        )

        for listener in list(self.listeners):
            listener(block)

        return block

    def validate(self, tx: Transaction) -> TxValidationCode:
        if tx.tx_id in self.tx_ids:
            return TxValidationCode.DUPLICATE_TXID

        for key, version in tx.read_set:
            if self.current_version(key) != version:
                return TxValidationCode.MVCC_READ_CONFLICT

        for resolver_id, change in self.stake_changes(tx).items():
            if change < 0 and self.aggregate_stake(resolver_id) + change < 0:
                return TxValidationCode.STAKE_OVERDRAWN

        return TxValidationCode.VALID

    def stake_changes(self, tx: Transaction) -> dict[tt.ResolverID, tt.Stake]:
        changes: collections.Counter[tt.ResolverID] = collections.Counter()

        for key, value in tx.write_set.items():
            if key.namespace != Namespace.TOKEN_OP:
                continue

            resolver_id = key.attributes[0]
            if (row := self.states.get(key.raw)) is not None:
                changes[resolver_id] -= get_delta(row.value)
            if value is not None:
                changes[resolver_id] += get_delta(value)

        return dict(changes)

    def apply(self, tx: Transaction, version: tt.Version) -> None:
        for resolver_id, change in self.stake_changes(tx).items():
            self.stake_totals[resolver_id] += change

        for key, value in tx.write_set.items():
            bucket = self.buckets[key.namespace, key.attributes[0]]

            if value is None:
                if self.states.pop(key.raw, None) is not None:
                    self.tombstones[key.raw] = version
                    bucket.discard(key.raw)
                continue

            self.states[key.raw] = StateRow(key, value, version)
            self.tombstones.pop(key.raw, None)
            bucket.add(key.raw)

    def dump_state(self) -> dict[str, t.Any]:
        with self.lock:
            return {
                "height": self.height,
                "tx_counter": self.peek_counter(),
                "enrolled": dict(sorted(self.enrolled.items())),
                "tx_ids": sorted(self.tx_ids),
                "states": [
                    {
                        "namespace": row.key.namespace.name,
                        "key": key_to_document(row.key),
                        "value": json.loads(row.value),
                        "version": list(row.version),
                    }
                    for row in self.iter_states()
                ],
                "tombstones": [
                    {
                        "namespace": key.namespace.name,
                        "key": key_to_document(key),
                        "version": list(version),
                    }
                    for key, version in self.iter_tombstones()
                ],
            }

    def dumps(self) -> bytes:
        return utils.canonical_json(self.dump_state())

    def state_root(self) -> str:
        return hashlib.sha256(self.dumps()).hexdigest()

    def peek_counter(self) -> int:
        # itertools.count has no public peek
        value = next(self.tx_counter)
        self.tx_counter = itertools.count(value)

        return value

    @classmethod
    def load_state(cls, doc: dict[str, t.Any]) -> te.Self:
        ledger = cls()
        ledger.height = int(doc["height"])
        ledger.tx_counter = itertools.count(int(doc["tx_counter"]))
        ledger.tx_ids = set(doc["tx_ids"])

        for resolver_id, stake in doc["enrolled"].items():
            ledger.enroll(resolver_id, int(stake))

        for item in doc["states"]:
            key = key_from_document(Namespace[item["namespace"]], item["key"])
            value = utils.canonical_json(item["value"])
            height, index = item["version"]

            ledger.states[key.raw] = StateRow(key, value, (height, index))
            ledger.buckets[key.namespace, key.attributes[0]].add(key.raw)
            if key.namespace == Namespace.TOKEN_OP:
                ledger.stake_totals[key.attributes[0]] += get_delta(value)

        for item in doc.get("tombstones", []):
            key = key_from_document(Namespace[item["namespace"]], item["key"])
            height, index = item["version"]
            ledger.tombstones[key.raw] = (height, index)

        return ledger

    @classmethod
    def loads(cls, data: bytes) -> te.Self:
        return cls.load_state(json.loads(data))


def get_delta(value: bytes) -> tt.Stake:
    return int(json.loads(value)["delta"])
