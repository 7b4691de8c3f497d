from tidns.ledger.archive import load_ledger_from
from tidns.ledger.archive import save_ledger_to
from tidns.ledger.keys import CompositeKey
from tidns.ledger.keys import Namespace
from tidns.ledger.keys import create_composite_key
from tidns.ledger.models import StakeDelta
from tidns.ledger.models import VerifiedRecordEntry
from tidns.ledger.models import VoteEntry
from tidns.ledger.models import VoteResult
from tidns.ledger.models import make_tmp
from tidns.ledger.orderer import Orderer
from tidns.ledger.store import Block
from tidns.ledger.store import Event
from tidns.ledger.store import Ledger
from tidns.ledger.store import Transaction
from tidns.ledger.store import TxValidationCode


__all__ = (
    "Block",
    "CompositeKey",
    "Event",
    "Ledger",
    "Namespace",
    "Orderer",
    "StakeDelta",
    "Transaction",
    "TxValidationCode",
    "VerifiedRecordEntry",
    "VoteEntry",
    "VoteResult",
    "create_composite_key",
    "load_ledger_from",
    "make_tmp",
    "save_ledger_to",
)
