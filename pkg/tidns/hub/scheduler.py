from __future__ import annotations

import logging
import threading
import typing as t


if t.TYPE_CHECKING:
    from tidns import types as tt


LOG = logging.getLogger(__name__)


class Scheduler:
    """Call func every period seconds on a daemon thread until stopped.

    A failing call is logged and counted; the next tick still happens.
    """

    period: tt.TimeSeconds
    func: t.Callable[[], None]
    name: str
    ticks: int
    failures: int
    stopped: threading.Event
    thread: threading.Thread | None

    def __init__(
        self,
        period: tt.TimeSeconds,
        func: t.Callable[[], None],
        *,
        name: str | None = None,
    ) -> None:
        if period <= 0:
            raise ValueError(f"Scheduler period must be positive: {period}")

        self.period = period
        self.func = func
        self.name = name or getattr(func, "__name__", repr(func))
        self.ticks = 0
        self.failures = 0
        self.stopped = threading.Event()
        self.thread = None

    def is_running(self) -> bool:
        return self.thread is not None and self.thread.is_alive()

    def start(self) -> None:
        if self.thread is not None:
            raise RuntimeError(f"Scheduler {self.name} was already started")

        self.thread = threading.Thread(
            target=self.loop, name=f"scheduler-{self.name}", daemon=True
        )
        self.thread.start()

    def loop(self) -> None:
        while not self.stopped.wait(self.period):
            self.ticks += 1
            try:
                self.func()
            except Exception:
                self.failures += 1
                LOG.warning("Tick %d of %s failed", self.ticks, self.name)
                LOG.debug("Failure details", exc_info=True)

        LOG.debug("%s stopped after %d ticks", self.name, self.ticks)

    def stop(self, timeout: float | None = None) -> None:
        self.stopped.set()

        thread = self.thread
        if (
            thread is not None
            and thread is not threading.current_thread()
            and thread.is_alive()
        ):
            thread.join(timeout)
