from __future__ import annotations

import dataclasses
import enum
import heapq
import itertools
import logging
import typing as t


if t.TYPE_CHECKING:
    from tidns import types as tt

    Handler = t.Callable[["SimEvent"], None]


LOG = logging.getLogger(__name__)


class EventKind(enum.IntEnum):
    """Event kinds; the value is the tie-break rank at equal times."""

    BLOCK_CUT = 0
    FORGED_PACKET_BATCH = 1
    UPSTREAM_RESPONSE = 2
    CLIENT_QUERY = 3
    VOTE_REQUEST = 4
    VOTE_CAST = 5
    FINALIZE = 6


@dataclasses.dataclass(frozen=True, kw_only=True)
class SimEvent:
    time: tt.TimeMs
    kind: EventKind
    seq: int
    payload: tt.EventPayload = dataclasses.field(default_factory=dict)
    callback: t.Callable[[tt.TimeMs], None] | None = dataclasses.field(
        default=None, compare=False, repr=False
    )

    @property
    def sort_key(self) -> tuple[tt.TimeMs, int, int]:
        return self.time, int(self.kind), self.seq

    def to_document(self) -> dict[str, t.Any]:
        return {
            "time": self.time,
            "kind": self.kind.name.lower(),
            "seq": self.seq,
            "payload": self.payload,
        }


class EventQueue:
    heap: list[tuple[tuple[tt.TimeMs, int, int], SimEvent]]
    counter: t.Iterator[int]

    def __init__(self) -> None:
        self.heap = []
        self.counter = itertools.count()

    def __len__(self) -> int:
        return len(self.heap)

    def push(
        self,
        time: tt.TimeMs,
        kind: EventKind,
        payload: tt.EventPayload | None = None,
        callback: t.Callable[[tt.TimeMs], None] | None = None,
    ) -> SimEvent:
        event = SimEvent(
            time=time,
            kind=kind,
            seq=next(self.counter),
            payload=payload or {},
            callback=callback,
        )
        heapq.heappush(self.heap, (event.sort_key, event))

        return event

    def peek_time(self) -> tt.TimeMs | None:
        if not self.heap:
            return None

        return self.heap[0][1].time

    def pop(self) -> SimEvent:
        return heapq.heappop(self.heap)[1]


class Simulation:
    """Single-threaded discrete event loop.

    Events run in (time, kind rank, sequence) order. Handlers are bound
    per kind; an event may carry its own callback instead.
    """

    now: tt.TimeMs
    queue: EventQueue
    handlers: dict[EventKind, Handler]
    trace: list[SimEvent] | None
    processed: int

    def __init__(self, *, record_trace: bool = True) -> None:
        self.now = 0.0
        self.queue = EventQueue()
        self.handlers = {}
        self.trace = [] if record_trace else None
        self.processed = 0

    def on(self, kind: EventKind, handler: Handler) -> None:
        self.handlers[kind] = handler

    def schedule(
        self,
        delay: tt.TimeMs,
        kind: EventKind,
        payload: tt.EventPayload | None = None,
        callback: t.Callable[[tt.TimeMs], None] | None = None,
    ) -> SimEvent:
        if delay < 0:
            raise ValueError(f"Cannot schedule {kind.name} in the past")

        return self.queue.push(self.now + delay, kind, payload, callback)

    def schedule_at(
        self,
        time: tt.TimeMs,
        kind: EventKind,
        payload: tt.EventPayload | None = None,
        callback: t.Callable[[tt.TimeMs], None] | None = None,
    ) -> SimEvent:
        return self.schedule(time - self.now, kind, payload, callback)

    def step(self) -> SimEvent:
        event = self.queue.pop()
        self.now = event.time
        self.processed += 1

        if self.trace is not None:
            self.trace.append(event)

        if event.callback is not None:
            event.callback(event.time)
        elif (handler := self.handlers.get(event.kind)) is not None:
            handler(event)
        else:
            LOG.warning("No handler for %s at %s", event.kind.name, event.time)

        return event

    def run(self, until: tt.TimeMs | None = None) -> list[SimEvent]:
        start = len(self.trace) if self.trace is not None else 0

        while (next_time := self.queue.peek_time()) is not None:
            if until is not None and next_time > until:
                break
            self.step()

        if until is not None and until > self.now:
            self.now = until

        return [] if self.trace is None else self.trace[start:]
