from __future__ import annotations

import json
import pathlib
import typing as t

import pyzstd

from tidns.ledger.archive import ZSTD_LEVEL


if t.TYPE_CHECKING:
    import os

    from tidns.simnet.events import SimEvent


def dump_trace(events: t.Iterable[SimEvent]) -> bytes:
    lines = [
        json.dumps(event.to_document(), sort_keys=True, separators=(",", ":"))
        for event in events
    ]
    if not lines:
        return b""

    return ("\n".join(lines) + "\n").encode("utf-8")


def export_trace(
    events: t.Iterable[SimEvent], path: os.PathLike[str] | pathlib.Path
) -> pathlib.Path:
    path = pathlib.Path(path)
    data = dump_trace(events)

    if path.suffix == ".zst":
        data = pyzstd.compress(data, ZSTD_LEVEL)

    path.write_bytes(data)

    return path


def read_trace(
    path: os.PathLike[str] | pathlib.Path,
) -> list[dict[str, t.Any]]:
    path = pathlib.Path(path)
    data = path.read_bytes()

    if path.suffix == ".zst":
        data = pyzstd.decompress(data)

    return [json.loads(line) for line in data.decode("utf-8").splitlines()]
