from __future__ import annotations

import typing as t

import numpy as np

from tidns import exceptions


if t.TYPE_CHECKING:
    from tidns.simnet.params import SimParams


def closed_form_poison_prob(
    space: int, outstanding: int, packets: int
) -> float:
    """Probability that packets distinct guesses hit one of outstanding ids.

    Equals 1 - prod((I - D - j) / (I - j)) for j in 0..F-1, summed in log
    space to keep tiny probabilities accurate.
    """

    if packets > space:
        raise exceptions.PoisonProbabilityError(space, packets)
    if outstanding <= 0 or packets <= 0:
        return 0.0
    if packets > space - outstanding:
        return 1.0

    steps = np.arange(packets, dtype=np.float64)
    log_miss = np.log1p(-outstanding / (space - steps)).sum()

    return float(-np.expm1(log_miss))


def sample_txids(
    rng: np.random.Generator, space: int, outstanding: int
) -> np.ndarray:
    return rng.choice(space, size=outstanding, replace=False)


def kaminsky_attempt(
    target_txids: np.ndarray,
    params: SimParams,
    rng: np.random.Generator,
    *,
    packets: int | None = None,
) -> bool:
    """One flood of forged responses against a resolver's open queries.

    Every forged packet is sent before the authentic answer arrives, so the
    attempt succeeds iff a guess matches an outstanding TXID.
    """

    if packets is None:
        packets = params.packets_per_target
    if packets <= 0 or len(target_txids) == 0:
        return False

    if params.with_replacement:
        guesses = rng.integers(0, params.txid_space, size=packets)
    else:
        guesses = rng.choice(
            params.txid_space,
            size=min(packets, params.txid_space),
            replace=False,
        )

    return bool(
        np.isin(
            guesses, target_txids, assume_unique=not params.with_replacement
        ).any()
    )


def attack_round(
    params: SimParams, rng: np.random.Generator, *, packets: int | None = None
) -> frozenset[int]:
    """Attack all targets at once and return the poisoned indices."""

    poisoned = set()

    for index in range(params.attacked):
        txids = sample_txids(rng, params.txid_space, params.outstanding)
        if kaminsky_attempt(txids, params, rng, packets=packets):
            poisoned.add(index)

    return frozenset(poisoned)
