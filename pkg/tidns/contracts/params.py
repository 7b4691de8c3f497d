from __future__ import annotations

import dataclasses
import enum
import typing as t

from tidns import exceptions


if t.TYPE_CHECKING:
    from tidns import types as tt


class PolicyRule(enum.Enum):
    MAJORITY = "majority"


@dataclasses.dataclass(frozen=True, kw_only=True)
class IncentiveParams:
    reward: tt.Stake = 1
    submission_fee: tt.Stake = 2
    min_stake_threshold: tt.Stake = 10
    initial_stake: tt.Stake = 100
    grace_period_ms: tt.TimeMs = 5000.0
    voters_n: int = 9
    policy_rule: PolicyRule = PolicyRule.MAJORITY
    fresh_vote_lookup: bool = False

    def __post_init__(self) -> None:
        if self.reward <= 0:
            raise exceptions.InvalidConfigError("incentive", "reward <= 0")
        if self.submission_fee < 0:
            raise exceptions.InvalidConfigError(
                "incentive", "submission_fee < 0"
            )
        if self.min_stake_threshold < 0:
            raise exceptions.InvalidConfigError(
                "incentive", "min_stake_threshold < 0"
            )
        if self.initial_stake < 0:
            raise exceptions.InvalidConfigError(
                "incentive", "initial_stake < 0"
            )
        if self.grace_period_ms <= 0:
            raise exceptions.InvalidConfigError(
                "incentive", "grace_period_ms <= 0"
            )
        if self.voters_n < 1:
            raise exceptions.InvalidConfigError("incentive", "voters_n < 1")

    @property
    def required_stake(self) -> tt.Stake:
        return self.min_stake_threshold + self.submission_fee

    def policy(self, voters: int | None = None) -> int:
        voters = self.voters_n if voters is None else voters

        match self.policy_rule:
            case PolicyRule.MAJORITY:
                return voters // 2 + 1

        raise RuntimeError(f"Unknown policy rule {self.policy_rule}")
