from __future__ import annotations

import typing as t

import numpy as np

from tidns import exceptions


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.ledger import Ledger


def voter_selection(
    n: int,
    participants: t.Mapping[tt.ResolverID, tt.Stake],
    rng: np.random.Generator,
) -> list[tt.ResolverID]:
    """Draw n distinct voters, each draw proportional to remaining stake.

    Candidates are ordered by identifier so a seeded generator always
    produces the same committee.
    """

    if n < 1:
        raise ValueError(f"Cannot select {n} voters")

    if participants and sum(participants.values()) <= 0:
        raise exceptions.ZeroStakeError()

    pool = sorted(
        resolver_id
        for resolver_id, stake in participants.items()
        if stake > 0
    )
    if n > len(pool):
        raise exceptions.InsufficientVotersError(n, len(pool))

    stakes = np.array(
        [participants[resolver_id] for resolver_id in pool], dtype=np.float64
    )
    picks = rng.choice(
        len(pool), size=n, replace=False, p=stakes / stakes.sum()
    )

    return [pool[index] for index in picks]


def eligible_participants(
    ledger: Ledger, creator_id: tt.ResolverID
) -> dict[tt.ResolverID, tt.Stake]:
    return {
        resolver_id: stake
        for resolver_id, stake in ledger.participants().items()
        if resolver_id != creator_id and stake > 0
    }
