from __future__ import annotations

import dataclasses
import threading
import typing as t


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.dnscore.records import Query
    from tidns.dnscore.records import RecordSet


@dataclasses.dataclass(frozen=True, kw_only=True)
class CacheEntry:
    record: RecordSet
    inserted_at: tt.TimeMs
    ttl: int

    def is_fresh(self, now: tt.TimeMs) -> bool:
        return now < self.inserted_at + self.ttl * 1000


class RecordCache:
    entries: dict[Query, CacheEntry]
    lock: threading.Lock

    def __init__(self) -> None:
        self.entries = {}
        self.lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, query: Query, now: tt.TimeMs) -> RecordSet | None:
        with self.lock:
            entry = self.entries.get(query)
            if entry is None:
                return None

            if not entry.is_fresh(now):
                del self.entries[query]
                return None

            return entry.record

    def put(
        self, record: RecordSet, now: tt.TimeMs, ttl: int | None = None
    ) -> None:
        ttl = record.ttl if ttl is None else ttl
        entry = CacheEntry(record=record, inserted_at=now, ttl=ttl)

        with self.lock:
            # zero TTL means the answer must not be cached
            if ttl <= 0:
                self.entries.pop(record.query, None)
            else:
                self.entries[record.query] = entry

    def clear(self) -> None:
        with self.lock:
            self.entries.clear()
