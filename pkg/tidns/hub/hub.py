from __future__ import annotations

import abc
import concurrent.futures
import logging
import sys
import threading
import typing as t
import uuid


if t.TYPE_CHECKING:
    import typing_extensions as te


__all__ = ("AbstractHub", "EventHub", "ReplicationHub")


LOG = logging.getLogger(__name__)

T = t.TypeVar("T")
R = t.TypeVar("R")


class AbstractHub(metaclass=abc.ABCMeta):
    oid: uuid.UUID
    event_closed: threading.Event
    semaphore: threading.BoundedSemaphore

    def __init__(self, *, in_progress_limit: int = sys.maxsize) -> None:
        self.oid = uuid.uuid4()
        self.event_closed = threading.Event()
        self.semaphore = threading.BoundedSemaphore(in_progress_limit)

    def shutdown(self) -> None:
        self.event_closed.set()
        LOG.debug("Closing hub %s", self.oid)

    def is_working(self) -> bool:
        return not self.event_closed.is_set()

    def __enter__(self) -> te.Self:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.shutdown()

    def release(self, _: concurrent.futures.Future[t.Any]) -> None:
        self.semaphore.release()


class ReplicationHub(AbstractHub):
    """Fan replications out to worker processes.

    One worker means no pool at all: jobs run inline in the calling
    process, which keeps single-seed runs debuggable.
    """

    num_workers: int | None
    worker_pool: concurrent.futures.ProcessPoolExecutor | None

    def __init__(
        self,
        *,
        num_workers: int | None = None,
        in_progress_limit: int = sys.maxsize,
    ) -> None:
        super().__init__(in_progress_limit=in_progress_limit)

        self.num_workers = num_workers
        self.worker_pool = None
        if num_workers != 1:
            self.worker_pool = concurrent.futures.ProcessPoolExecutor(
                max_workers=num_workers
            )

    def shutdown(self) -> None:
        super().shutdown()
        if self.worker_pool is not None:
            self.worker_pool.shutdown()

        LOG.debug("Hub %s is closed", self.oid)

    def run_all(
        self, func: t.Callable[[T], R], jobs: t.Iterable[T]
    ) -> list[R]:
        """Run func over jobs and return results in job order."""

        if not self.is_working():
            raise RuntimeError(f"Hub {self.oid} is closed")

        if self.worker_pool is None:
            return [func(job) for job in jobs]

        futures = []
        for job in jobs:
            # blocks until a running replication finishes
            self.semaphore.acquire()
            future = self.worker_pool.submit(func, job)
            future.add_done_callback(self.release)
            futures.append(future)

        LOG.debug("Hub %s runs %d replications", self.oid, len(futures))

        return [future.result() for future in futures]


class EventHub(AbstractHub):
    """Deliver ledger events to in-process nodes on a thread pool."""

    worker_pool: concurrent.futures.ThreadPoolExecutor

    def __init__(
        self,
        *,
        num_workers: int | None = None,
        in_progress_limit: int = sys.maxsize,
    ) -> None:
        super().__init__(in_progress_limit=in_progress_limit)

        self.worker_pool = concurrent.futures.ThreadPoolExecutor(
            max_workers=num_workers, thread_name_prefix="tidns_events"
        )

    def shutdown(self) -> None:
        super().shutdown()
        self.worker_pool.shutdown()

        LOG.debug("Hub %s is closed", self.oid)

    def send(self, callback: t.Callable[..., None], *args: t.Any) -> bool:
        if not self.is_working():
            LOG.warning(
                "Event for %s is dropped: hub %s is closed",
                getattr(callback, "__name__", callback),
                self.oid,
            )
            return False

        if not self.semaphore.acquire(blocking=False):
            LOG.warning(
                "Event for %s is dropped: hub %s has too many in flight",
                getattr(callback, "__name__", callback),
                self.oid,
            )
            return False

        try:
            future = self.worker_pool.submit(self.process, callback, *args)
        except RuntimeError as exc:
            LOG.warning("Worker pool of hub %s is gone: %s", self.oid, exc)
            self.event_closed.set()
            self.semaphore.release()
            return False

        future.add_done_callback(self.release)

        return True

    def process(self, callback: t.Callable[..., None], *args: t.Any) -> None:
        try:
            callback(*args)
        except Exception as exc:
            LOG.error(
                "Delivery to %s failed in hub %s: %s",
                getattr(callback, "__name__", callback),
                self.oid,
                exc,
            )
