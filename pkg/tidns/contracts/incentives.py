from __future__ import annotations

import json
import typing as t

from tidns import utils
from tidns.ledger import Namespace
from tidns.ledger import StakeDelta
from tidns.ledger import create_composite_key
from tidns.ledger import make_tmp


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.contracts.params import IncentiveParams
    from tidns.ledger import Ledger
    from tidns.ledger import Transaction


SINGLE_ROW_TMP = "balance"


def apply_incentives(
    ledger: Ledger,
    tx: Transaction,
    winners: t.Iterable[tt.ResolverID],
    amount: tt.Stake,
    *,
    first_index: int = 0,
) -> list[StakeDelta]:
    if amount <= 0:
        raise ValueError(f"Reward {amount} must be positive")

    deltas = [
        StakeDelta(
            resolver_id=winner,
            tmp=make_tmp(tx.timestamp, tx.tx_id, first_index + index),
            delta=amount,
        )
        for index, winner in enumerate(sorted(set(winners)))
    ]

    for delta in deltas:
        ledger.put_state(tx, delta.key, delta.encode())

    return deltas


def charge_fee(
    ledger: Ledger,
    tx: Transaction,
    resolver_id: tt.ResolverID,
    fee: tt.Stake,
    *,
    index: int = 0,
) -> StakeDelta | None:
    if fee == 0:
        return None

    delta = StakeDelta(
        resolver_id=resolver_id,
        tmp=make_tmp(tx.timestamp, tx.tx_id, index),
        delta=-fee,
    )
    ledger.put_state(tx, delta.key, delta.encode())

    return delta


def check_submission_allowed(
    ledger: Ledger, resolver_id: tt.ResolverID, params: IncentiveParams
) -> bool:
    return ledger.aggregate_stake(resolver_id) >= params.required_stake


def reward_single_row(
    ledger: Ledger,
    tx: Transaction,
    resolver_id: tt.ResolverID,
    amount: tt.Stake,
) -> tt.Stake:
    """Read-modify-write reward on one balance row per resolver.

    Kept as the conflicting counterpart of apply_incentives: rewards
    endorsed against the same snapshot invalidate each other at commit.
    """

    key = create_composite_key(
        Namespace.TOKEN_OP, [resolver_id, SINGLE_ROW_TMP]
    )
    current = ledger.get_state(key, tx)
    balance = 0 if current is None else int(json.loads(current)["delta"])
    balance += amount

    ledger.put_state(tx, key, utils.canonical_json({"delta": balance}))

    return balance
