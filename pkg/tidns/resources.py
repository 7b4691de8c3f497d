from __future__ import annotations

import dataclasses
import logging
import time
import typing as t

import psutil


if t.TYPE_CHECKING:
    import types as stdtypes

    import typing_extensions as te

    from tidns import types as tt


LOG = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, kw_only=True)
class Snapshot:
    taken_at_ns: int
    cpu_user: tt.TimeSeconds
    cpu_kernel: tt.TimeSeconds
    rss: int

    @classmethod
    def create(cls, proc: psutil.Process) -> te.Self:
        with proc.oneshot():
            times = proc.cpu_times()
            memory = proc.memory_info()

        return cls(
            taken_at_ns=time.monotonic_ns(),
            cpu_user=times.user + times.children_user,
            cpu_kernel=times.system + times.children_system,
            rss=memory.rss,
        )


@dataclasses.dataclass(frozen=True, kw_only=True)
class Usage:
    name: str
    wall: tt.TimeSeconds
    cpu_user: tt.TimeSeconds
    cpu_kernel: tt.TimeSeconds
    rss: int
    rss_delta: int

    def to_document(self) -> dict[str, t.Any]:
        return {
            "name": self.name,
            "wall_s": round(self.wall, 3),
            "cpu_user_s": round(self.cpu_user, 3),
            "cpu_kernel_s": round(self.cpu_kernel, 3),
            "rss_mb": round(self.rss / 2**20, 1),
            "rss_delta_mb": round(self.rss_delta / 2**20, 1),
        }


class Measurement:
    """Context manager measuring wall time, CPU and RSS of a phase."""

    name: str
    proc: psutil.Process
    before: Snapshot | None
    usage: Usage | None

    def __init__(self, name: str) -> None:
        self.name = name
        self.proc = psutil.Process()
        self.before = None
        self.usage = None

    def __enter__(self) -> te.Self:
        self.before = Snapshot.create(self.proc)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        exc_tb: stdtypes.TracebackType | None,
    ) -> None:
        after = Snapshot.create(self.proc)
        before = t.cast(Snapshot, self.before)

        self.usage = Usage(
            name=self.name,
            wall=(after.taken_at_ns - before.taken_at_ns) / 1e9,
            cpu_user=after.cpu_user - before.cpu_user,
            cpu_kernel=after.cpu_kernel - before.cpu_kernel,
            rss=after.rss,
            rss_delta=after.rss - before.rss,
        )

        LOG.info(
            "%s took %.3fs wall, %.3fs user, %.3fs kernel",
            self.name,
            self.usage.wall,
            self.usage.cpu_user,
            self.usage.cpu_kernel,
            extra={"fields": self.usage.to_document()},
        )


def measure(name: str) -> Measurement:
    return Measurement(name)
