from __future__ import annotations

import io
import zipfile

import pytest
import pyzstd

from tidns import exceptions
from tidns.ledger import CompositeKey
from tidns.ledger import Ledger
from tidns.ledger import Namespace
from tidns.ledger import Orderer
from tidns.ledger import StakeDelta
from tidns.ledger import TxValidationCode
from tidns.ledger import archive
from tidns.ledger import create_composite_key
from tidns.ledger import load_ledger_from
from tidns.ledger import save_ledger_to


def put_delta(
    ledger: Ledger, resolver_id: str, tmp: str, delta: int
) -> TxValidationCode:
    tx = ledger.begin(resolver_id, 0.0)
    entry = StakeDelta(resolver_id=resolver_id, tmp=tmp, delta=delta)
    ledger.put_state(tx, entry.key, entry.encode())

    return ledger.commit_block([tx]).validation_codes[0]


@pytest.mark.parametrize(
    "attributes",
    [
        ["www.foo.com.", "A", "tx1", "r00"],
        ["a"],
        ["ünïcode", "ключ"],
    ],
)
def test_composite_key_decodes_back(attributes: list[str]) -> None:
    key = create_composite_key(Namespace.VR, attributes)

    assert CompositeKey.decode(key.raw) == key
    assert CompositeKey.decode(key.raw).attributes == tuple(attributes)


def test_composite_key_is_injective() -> None:
    left = create_composite_key(Namespace.VR, ["ab", "c"])
    right = create_composite_key(Namespace.VR, ["a", "bc"])

    assert left.raw != right.raw


def test_composite_key_prefix_is_byte_prefix() -> None:
    key = create_composite_key(Namespace.VOTE, ["r01", "tx1"])
    prefix = create_composite_key(Namespace.VOTE, ["r01"])

    assert key.raw.startswith(prefix.raw)
    assert key.starts_with(["r01"])


@pytest.mark.parametrize("attributes", [[], ["bad\x00name"], [""]])
def test_composite_key_rejects(attributes: list[str]) -> None:
    with pytest.raises(exceptions.InvalidCompositeKeyError):
        create_composite_key(Namespace.TOKEN_OP, attributes)


def test_decode_truncated_key() -> None:
    key = create_composite_key(Namespace.VR, ["abc"])

    with pytest.raises(exceptions.InvalidCompositeKeyError):
        CompositeKey.decode(key.raw[:-1])


def test_write_is_visible_after_commit_only(ledger: Ledger) -> None:
    key = create_composite_key(Namespace.VOTE, ["r00", "tx"])
    tx = ledger.begin("r00", 0.0)
    ledger.put_state(tx, key, b'{"result":"yes"}')

    assert ledger.get_state(key) is None

    block = ledger.commit_block([tx])

    assert block.valid_flags == (True,)
    assert ledger.get_state(key) == b'{"result":"yes"}'
    assert ledger.current_version(key) == (1, 0)


def test_double_write_in_one_transaction(ledger: Ledger) -> None:
    key = create_composite_key(Namespace.VOTE, ["r00", "tx"])
    tx = ledger.begin("r00", 0.0)
    ledger.put_state(tx, key, b"{}")

    with pytest.raises(exceptions.DuplicateWriteError):
        ledger.put_state(tx, key, b"{}")


def test_sealed_transaction_rejects_writes(ledger: Ledger) -> None:
    key = create_composite_key(Namespace.VOTE, ["r00", "tx"])
    tx = ledger.begin("r00", 0.0)
    ledger.commit_block([tx])

    with pytest.raises(exceptions.TransactionClosedError):
        ledger.put_state(tx, key, b"{}")


def test_stale_read_is_invalidated(ledger: Ledger) -> None:
    key = create_composite_key(Namespace.VOTE, ["r00", "tx"])

    first = ledger.begin("r00", 0.0)
    second = ledger.begin("r01", 0.0)
    for tx in first, second:
        ledger.get_state(key, tx)
        ledger.put_state(tx, key, b"{}")

    block = ledger.commit_block([first, second])

    assert block.validation_codes == (
        TxValidationCode.VALID,
        TxValidationCode.MVCC_READ_CONFLICT,
    )
    assert list(block.invalid_transactions()) == [
        (second, TxValidationCode.MVCC_READ_CONFLICT)
    ]


def test_range_read_records_versions(ledger: Ledger) -> None:
    for tmp in "ab":
        put_delta(ledger, "r00", tmp, 1)

    reader = ledger.begin("r01", 0.0)
    rows = list(
        ledger.get_state_by_partial_composite_key(
            Namespace.TOKEN_OP, ["r00"], reader
        )
    )

    assert len(rows) == 2
    assert len(reader.read_set) == 2


def test_duplicate_txid_is_rejected(ledger: Ledger) -> None:
    tx = ledger.begin("r00", 0.0)
    ledger.commit_block([tx])

    block = ledger.commit_block([tx])

    assert block.validation_codes == (TxValidationCode.DUPLICATE_TXID,)


def test_aggregate_stake_sums_deltas(ledger: Ledger) -> None:
    put_delta(ledger, "r00", "a", 5)
    put_delta(ledger, "r00", "b", -2)

    assert ledger.aggregate_stake("r00") == 103
    assert ledger.participants()["r00"] == 103


def test_overdraw_is_invalidated(ledger: Ledger) -> None:
    code = put_delta(ledger, "r00", "a", -101)

    assert code == TxValidationCode.STAKE_OVERDRAWN
    assert ledger.aggregate_stake("r00") == 100


def test_listeners_see_every_block(ledger: Ledger) -> None:
    heights = []
    ledger.subscribe(lambda block: heights.append(block.height))

    ledger.commit_block([ledger.begin("r00", 0.0)])
    ledger.commit_block([])

    assert heights == [1, 2]


def test_offline_ledger_is_unavailable(ledger: Ledger) -> None:
    ledger.set_online(False)

    with pytest.raises(exceptions.LedgerUnavailableError):
        ledger.begin("r00", 0.0)

    ledger.set_online(True)
    ledger.begin("r00", 0.0)


def test_dump_and_load_keep_state_root(verified_ledger: Ledger) -> None:
    put_delta(verified_ledger, "r03", "a", 7)

    loaded = Ledger.loads(verified_ledger.dumps())

    assert loaded.state_root() == verified_ledger.state_root()
    assert loaded.aggregate_stake("r03") == 107
    assert loaded.height == verified_ledger.height


def test_dump_keeps_tombstones(verified_ledger: Ledger) -> None:
    put_delta(verified_ledger, "r03", "a", 7)
    key = StakeDelta(resolver_id="r03", tmp="a", delta=7).key
    tx = verified_ledger.begin("r03", 0.0)
    verified_ledger.delete_state(tx, key)
    verified_ledger.commit_block([tx])

    reader = verified_ledger.begin("r04", 0.0)
    assert verified_ledger.get_state(key, reader) is None
    entry = StakeDelta(resolver_id="r04", tmp="b", delta=1)
    verified_ledger.put_state(reader, entry.key, entry.encode())

    loaded = Ledger.loads(verified_ledger.dumps())

    assert loaded.current_version(key) is not None
    assert loaded.current_version(key) == verified_ledger.current_version(key)
    assert loaded.state_root() == verified_ledger.state_root()
    assert loaded.commit_block([reader]).validation_codes == (
        TxValidationCode.VALID,
    )


def test_archive_round_trip(verified_ledger: Ledger) -> None:
    buf = io.BytesIO()
    save_ledger_to(buf, verified_ledger)
    buf.seek(0)

    loaded = load_ledger_from(buf)

    assert loaded.state_root() == verified_ledger.state_root()


def test_archive_rejects_garbage() -> None:
    with pytest.raises(zipfile.BadZipFile):
        load_ledger_from(io.BytesIO(b"not a zip file"))


def rewrite_archive(
    source: io.BytesIO, name: str, data: bytes | str
) -> io.BytesIO:
    source.seek(0)
    target = io.BytesIO()

    with zipfile.ZipFile(source) as zin, zipfile.ZipFile(target, "w") as zout:
        for item in zin.namelist():
            zout.writestr(item, data if item == name else zin.read(item))

    target.seek(0)

    return target


def test_archive_sniff(verified_ledger: Ledger) -> None:
    buf = io.BytesIO()
    save_ledger_to(buf, verified_ledger)
    buf.seek(0)

    version, metadata = archive.sniff(buf, validate=True)

    assert version == archive.VERSION
    assert metadata["height"] == verified_ledger.height
    assert metadata["state_root"] == verified_ledger.state_root()


def test_archive_rejects_other_version(verified_ledger: Ledger) -> None:
    buf = io.BytesIO()
    save_ledger_to(buf, verified_ledger)

    with pytest.raises(exceptions.ArchiveUnsupportedVersionError):
        load_ledger_from(rewrite_archive(buf, archive.FILE_VERSION, "2\n"))


def test_archive_rejects_tampered_state(verified_ledger: Ledger) -> None:
    buf = io.BytesIO()
    save_ledger_to(buf, verified_ledger)
    other = pyzstd.compress(Ledger().dumps())

    with pytest.raises(exceptions.ArchiveBadFileError):
        load_ledger_from(rewrite_archive(buf, archive.FILE_STATE, other))


class TestOrderer:
    def test_cut_by_size(self, ledger: Ledger) -> None:
        orderer = Orderer(ledger, block_size=2, block_interval_ms=100.0)

        assert orderer.submit(ledger.begin("r00", 0.0), 0.0) is None
        block = orderer.submit(ledger.begin("r01", 1.0), 1.0)

        assert block is not None
        assert len(block.transactions) == 2
        assert len(orderer) == 0
        assert orderer.due_at is None

    def test_cut_by_interval(self, ledger: Ledger) -> None:
        orderer = Orderer(ledger, block_size=10, block_interval_ms=100.0)
        orderer.submit(ledger.begin("r00", 5.0), 5.0)

        assert orderer.due_at == 105.0
        assert orderer.tick(104.0) is None

        block = orderer.tick(105.0)

        assert block is not None
        assert block.height == 1

    def test_tick_without_pending(self, ledger: Ledger) -> None:
        orderer = Orderer(ledger)

        assert orderer.tick(1e9) is None
        assert ledger.height == 0

    @pytest.mark.parametrize(
        "kwargs", [{"block_size": 0}, {"block_interval_ms": 0.0}]
    )
    def test_bad_settings(self, ledger: Ledger, kwargs: dict) -> None:
        with pytest.raises(ValueError):
            Orderer(ledger, **kwargs)
