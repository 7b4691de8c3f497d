"""Comparator schemes scored by Monte Carlo instead of a full network.

ODD counts unmatched responses per outstanding question by default, so an
attacker gets at most odd_threshold - 1 forged packets per target before
the cryptographic fallback kicks in. OddCounterScope.TXID counts per
transaction id instead, which raises the cap to
min(F, (odd_threshold - 1) * D) for D outstanding queries. HARD-DNS needs
a majority of its voters poisoned in the same attempt; DepenDNS accepts
once a quorum of them agrees.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import typing as t

import numpy as np

from tidns import exceptions
from tidns.simnet import attack_round
from tidns.simnet import kaminsky_attempt
from tidns.simnet import sample_txids


if t.TYPE_CHECKING:
    from tidns.simnet import SimParams


LOG = logging.getLogger(__name__)


class Scheme(enum.Enum):
    TIDNS = "tidns"
    ODD = "odd"
    HARDDNS = "harddns"
    DEPENDNS = "dependns"
    DNSSEC = "dnssec"

    @property
    def is_baseline(self) -> bool:
        return self in {Scheme.ODD, Scheme.HARDDNS, Scheme.DEPENDNS}


class OddCounterScope(enum.Enum):
    QUESTION = "question"
    TXID = "txid"


@dataclasses.dataclass(frozen=True, kw_only=True)
class BaselineParams:
    """Acceptance rules of the comparator schemes.

    odd_threshold and dependns_accept_fraction are calibration knobs: the
    defaults put both schemes near 1e-3 at the default attack rate.
    """

    odd_threshold: int = 6
    odd_counter_scope: OddCounterScope = OddCounterScope.QUESTION
    dependns_accept_fraction: float = 0.4

    def __post_init__(self) -> None:
        if self.odd_threshold < 1:
            raise exceptions.InvalidConfigError(
                "baseline", "odd_threshold must be >= 1"
            )
        if not 0 < self.dependns_accept_fraction <= 1:
            raise exceptions.InvalidConfigError(
                "baseline", "dependns_accept_fraction must be in (0, 1]"
            )

    def odd_packet_cap(self, outstanding: int) -> int:
        cap = self.odd_threshold - 1
        if self.odd_counter_scope == OddCounterScope.TXID:
            cap *= outstanding

        return cap

    def dependns_quorum(self, voters: int) -> int:
        return math.ceil(self.dependns_accept_fraction * voters)


def odd_attempt(
    params: BaselineParams, sim: SimParams, rng: np.random.Generator
) -> bool:
    """One attack on a single resolver that turns to crypto on alarm.

    Forged packets past the unmatched-response threshold find the
    resolver in its cryptographic mode and never land.
    """

    if sim.attacked == 0:
        return False

    packets = min(
        sim.packets_per_target, params.odd_packet_cap(sim.outstanding)
    )
    txids = sample_txids(rng, sim.txid_space, sim.outstanding)

    return kaminsky_attempt(txids, sim, rng, packets=packets)


def consulted_poisoned(sim: SimParams, rng: np.random.Generator) -> int:
    poisoned = attack_round(sim, rng)
    if not poisoned:
        return 0

    consulted = rng.choice(sim.resolvers, size=sim.voters, replace=False)

    return sum(int(index) in poisoned for index in consulted)


def harddns_attempt(
    params: BaselineParams, sim: SimParams, rng: np.random.Generator
) -> bool:
    """A client trusts the answer a strict majority of V resolvers give."""

    return consulted_poisoned(sim, rng) * 2 > sim.voters


def dependns_attempt(
    params: BaselineParams, sim: SimParams, rng: np.random.Generator
) -> bool:
    """A client accepts any answer enough of V resolvers agree on."""

    return consulted_poisoned(sim, rng) >= params.dependns_quorum(sim.voters)


ATTEMPTS: dict[Scheme, t.Callable[..., bool]] = {
    Scheme.ODD: odd_attempt,
    Scheme.HARDDNS: harddns_attempt,
    Scheme.DEPENDNS: dependns_attempt,
}


def run_baseline(
    scheme: Scheme,
    params: BaselineParams,
    sim: SimParams,
    *,
    attempts: int | None = None,
) -> int:
    """Count successful attempts of a comparator scheme."""

    try:
        attempt = ATTEMPTS[scheme]
    except KeyError as exc:
        raise ValueError(f"{scheme.value} is not a baseline scheme") from exc

    if attempts is None:
        attempts = sim.attempts

    rng = np.random.Generator(np.random.PCG64(sim.seed))
    successes = sum(attempt(params, sim, rng) for _ in range(attempts))

    LOG.debug(
        "%s: %d successes of %d attempts", scheme.value, successes, attempts
    )

    return successes
