from __future__ import annotations

import dataclasses
import typing as t

from tidns import exceptions


if t.TYPE_CHECKING:
    from tidns import types as tt


# short names used in sweeps and in the literature
SWEEP_ALIASES = {
    "I": "txid_space",
    "T_a": "response_time_ms",
    "D": "outstanding",
    "S": "packet_rate",
    "N": "resolvers",
    "V": "voters",
    "A": "attacked",
}


@dataclasses.dataclass(frozen=True, kw_only=True)
class SimParams:
    txid_space: int = 65536
    response_time_ms: tt.TimeMs = 200.0
    outstanding: int = 50
    vote_outstanding: int = 1
    packet_rate: float = 5000.0
    resolvers: int = 12
    voters: int = 9
    attacked: int = 7
    attempts: int = 100_000
    seed: tt.Seed = 0

    split_attack_rate: bool = True
    with_replacement: bool = False
    attempt_interval_ms: tt.TimeMs = 10_000.0
    zone_ttl: int = 5
    forged_ttl: int = 60
    check_delay_ms: tt.TimeMs = 9_000.0
    target_name: str = "www.foo.com"
    target_address: str = "192.0.2.1"

    def __post_init__(self) -> None:
        if self.txid_space < 1:
            raise exceptions.InvalidConfigError("sim", "I must be >= 1")
        if not 0 < self.outstanding <= self.txid_space:
            raise exceptions.InvalidConfigError("sim", "D must be in 1..I")
        if not 0 < self.vote_outstanding <= self.txid_space:
            raise exceptions.InvalidConfigError(
                "sim", "vote_outstanding must be in 1..I"
            )
        if self.response_time_ms < 0:
            raise exceptions.InvalidConfigError("sim", "T_a must be >= 0")
        if self.packet_rate < 0:
            raise exceptions.InvalidConfigError("sim", "S must be >= 0")
        if not 0 <= self.attacked <= self.resolvers:
            raise exceptions.InvalidConfigError("sim", "A must be in 0..N")
        if not 1 <= self.voters <= self.resolvers - 1:
            raise exceptions.InvalidConfigError("sim", "V must be in 1..N-1")
        if self.attempts < 0:
            raise exceptions.InvalidConfigError("sim", "attempts < 0")
        if self.check_delay_ms >= self.attempt_interval_ms:
            raise exceptions.InvalidConfigError(
                "sim", "check_delay_ms must fit in attempt_interval_ms"
            )

    @property
    def packets_per_attempt(self) -> int:
        return int(self.packet_rate * self.response_time_ms / 1000)

    @property
    def packets_per_target(self) -> int:
        if self.attacked == 0:
            return 0
        if self.split_attack_rate:
            return self.packets_per_attempt // self.attacked

        return self.packets_per_attempt

    def resolver_ids(self) -> list[tt.ResolverID]:
        return [f"r{index:02d}" for index in range(self.resolvers)]

    def victim_ids(self) -> list[tt.ResolverID]:
        return self.resolver_ids()[: self.attacked]

    def replace(self, **changes: t.Any) -> SimParams:
        return dataclasses.replace(self, **changes)


def resolve_param_name(name: str) -> str:
    return SWEEP_ALIASES.get(name, name)
