"""Ledger snapshot archives.

A snapshot is a plain (stored) zip holding a version line, JSON
metadata and the zstd-compressed canonical state dump. Loading checks the
version, the archived class and the state root before handing the ledger
back.
"""

from __future__ import annotations

import datetime
import json
import typing as t
import zipfile

import pyzstd

from tidns import exceptions
from tidns import utils
from tidns.ledger.store import Ledger


if t.TYPE_CHECKING:
    from tidns import types as tt


VERSION: int = 1

FILE_VERSION = "version.txt"
FILE_METADATA = "metadata.json"
FILE_STATE = "state.json.zst"

ZSTD_LEVEL = 3


def read_header(zp: zipfile.ZipFile) -> tuple[int, tt.SnapshotMetadata]:
    try:
        version = int(zp.read(FILE_VERSION).strip().decode("ascii"))
        doc = json.loads(zp.read(FILE_METADATA))
        metadata: tt.SnapshotMetadata = {
            "created_at": datetime.datetime.fromisoformat(doc["created_at"]),
            "height": int(doc["height"]),
            "state_root": str(doc["state_root"]),
            "class_": str(doc["class_"]),
        }
    except KeyError as exc:
        raise exceptions.ArchiveBadFileError(str(exc)) from exc
    except (ValueError, UnicodeDecodeError) as exc:
        raise exceptions.ArchiveBadFileError(FILE_METADATA) from exc

    return version, metadata


def sniff(
    source: t.BinaryIO, *, validate: bool = False
) -> tuple[int, tt.SnapshotMetadata]:
    """Version and metadata of an archive without loading the state."""

    with zipfile.ZipFile(source, mode="r") as zp:
        if validate and (badfile := zp.testzip()) is not None:
            raise exceptions.ArchiveBadFileError(badfile)

        return read_header(zp)


def load_ledger_from(source: t.BinaryIO) -> Ledger:
    with zipfile.ZipFile(source, mode="r") as zp:
        if (badfile := zp.testzip()) is not None:
            raise exceptions.ArchiveBadFileError(badfile)

        version, metadata = read_header(zp)
        if version != VERSION:
            raise exceptions.ArchiveUnsupportedVersionError(version)
        if metadata["class_"] != utils.get_class_fqn(Ledger):
            raise exceptions.ArchiveClassMismatchError(metadata["class_"])

        try:
            state = pyzstd.decompress(zp.read(FILE_STATE))
        except (KeyError, pyzstd.ZstdError) as exc:
            raise exceptions.ArchiveBadFileError(FILE_STATE) from exc

    ledger = Ledger.loads(state)
    if ledger.state_root() != metadata["state_root"]:
        raise exceptions.ArchiveBadFileError(FILE_STATE)

    return ledger


def save_ledger_to(target: t.BinaryIO, ledger: Ledger) -> None:
    state = ledger.dumps()
    metadata = {
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "height": ledger.height,
        "state_root": ledger.state_root(),
        "class_": utils.get_class_fqn(Ledger),
    }

    with zipfile.ZipFile(
        target, mode="w", compression=zipfile.ZIP_STORED
    ) as zp:
        zp.writestr(FILE_VERSION, f"{VERSION}\n")
        zp.writestr(FILE_METADATA, json.dumps(metadata, sort_keys=True))
        zp.writestr(FILE_STATE, pyzstd.compress(state, ZSTD_LEVEL))
