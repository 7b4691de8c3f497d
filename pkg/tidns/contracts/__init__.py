from tidns.contracts.incentives import apply_incentives
from tidns.contracts.incentives import charge_fee
from tidns.contracts.incentives import check_submission_allowed
from tidns.contracts.incentives import reward_single_row
from tidns.contracts.params import IncentiveParams
from tidns.contracts.params import PolicyRule
from tidns.contracts.queryvote import EVENT_RECORD_FINISHED
from tidns.contracts.queryvote import EVENT_VALIDATION_REQUEST
from tidns.contracts.queryvote import EVENT_VOTE_NOTICE
from tidns.contracts.queryvote import FinishResult
from tidns.contracts.queryvote import FinishStatus
from tidns.contracts.queryvote import ValidationRequest
from tidns.contracts.queryvote import VoteNotice
from tidns.contracts.queryvote import cast_vote
from tidns.contracts.queryvote import create_or_update_record
from tidns.contracts.queryvote import finish_validation
from tidns.contracts.queryvote import seed_verified_record
from tidns.contracts.selection import eligible_participants
from tidns.contracts.selection import voter_selection
from tidns.contracts.verification import VerificationOutcome
from tidns.contracts.verification import find_record
from tidns.contracts.verification import iter_records
from tidns.contracts.verification import record_verification


__all__ = (
    "EVENT_RECORD_FINISHED",
    "EVENT_VALIDATION_REQUEST",
    "EVENT_VOTE_NOTICE",
    "FinishResult",
    "FinishStatus",
    "IncentiveParams",
    "PolicyRule",
    "ValidationRequest",
    "VerificationOutcome",
    "VoteNotice",
    "apply_incentives",
    "cast_vote",
    "charge_fee",
    "check_submission_allowed",
    "create_or_update_record",
    "eligible_participants",
    "find_record",
    "finish_validation",
    "iter_records",
    "record_verification",
    "reward_single_row",
    "seed_verified_record",
    "voter_selection",
)
