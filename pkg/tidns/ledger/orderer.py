from __future__ import annotations

import logging
import threading
import typing as t


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.ledger.store import Block
    from tidns.ledger.store import Ledger
    from tidns.ledger.store import Transaction


LOG = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 10
DEFAULT_BLOCK_INTERVAL_MS = 500.0


class Orderer:
    """Cuts pending transactions into blocks.

    A block is cut every block_size transactions or once the oldest
    pending transaction has waited block_interval_ms, whichever is first.
    """

    ledger: Ledger
    block_size: int
    block_interval_ms: tt.TimeMs
    pending: list[Transaction]
    opened_at: tt.TimeMs | None
    lock: threading.Lock

    def __init__(
        self,
        ledger: Ledger,
        *,
        block_size: int = DEFAULT_BLOCK_SIZE,
        block_interval_ms: tt.TimeMs = DEFAULT_BLOCK_INTERVAL_MS,
    ) -> None:
        if block_size < 1:
            raise ValueError(f"Block size {block_size} must be positive")
        if block_interval_ms <= 0:
            raise ValueError(f"Block interval {block_interval_ms} <= 0")

        self.ledger = ledger
        self.block_size = block_size
        self.block_interval_ms = block_interval_ms
        self.pending = []
        self.opened_at = None
        self.lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.pending)

    @property
    def due_at(self) -> tt.TimeMs | None:
        if self.opened_at is None:
            return None

        return self.opened_at + self.block_interval_ms

    def submit(self, tx: Transaction, now: tt.TimeMs) -> Block | None:
        tx.seal()

        with self.lock:
            if not self.pending:
                self.opened_at = now
            self.pending.append(tx)
            full = len(self.pending) >= self.block_size

        LOG.debug("Transaction %s from %s is pending", tx, tx.submitter)

        if full:
            return self.cut()

        return None

    def tick(self, now: tt.TimeMs) -> Block | None:
        due_at = self.due_at
        if due_at is None or now < due_at:
            return None

        return self.cut()

    def cut(self) -> Block | None:
        with self.lock:
            batch = self.pending[: self.block_size]
            self.pending = self.pending[self.block_size :]
            self.opened_at = None
            if self.pending:
                self.opened_at = self.pending[0].timestamp

        if not batch:
            return None

        return self.ledger.commit_block(batch)
