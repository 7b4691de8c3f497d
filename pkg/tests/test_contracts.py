from __future__ import annotations

import typing as t

import numpy as np
import pytest

from tidns import exceptions
from tidns import utils
from tidns.contracts import EVENT_VALIDATION_REQUEST
from tidns.contracts import FinishStatus
from tidns.contracts import IncentiveParams
from tidns.contracts import ValidationRequest
from tidns.contracts import VoteNotice
from tidns.contracts import apply_incentives
from tidns.contracts import cast_vote
from tidns.contracts import create_or_update_record
from tidns.contracts import eligible_participants
from tidns.contracts import find_record
from tidns.contracts import finish_validation
from tidns.contracts import record_verification
from tidns.contracts import reward_single_row
from tidns.contracts import voter_selection
from tidns.dnscore import Status
from tidns.ledger import VoteResult


if t.TYPE_CHECKING:
    from tidns.dnscore import RecordSet
    from tidns.ledger import Ledger
    from tidns.ledger import Transaction


def submit(
    ledger: Ledger,
    answer: RecordSet,
    params: IncentiveParams,
    creator: str = "r00",
    update_txids: t.Sequence[str] = (),
) -> tuple[Transaction, ValidationRequest]:
    tx, request = create_or_update_record(
        ledger,
        answer,
        creator,
        update_txids,
        params,
        seed=1,
        timestamp=10.0,
    )
    assert ledger.commit_block([tx]).valid_flags == (True,)

    return tx, request


def vote_all(
    ledger: Ledger,
    tx: Transaction,
    request: ValidationRequest,
    observed: RecordSet,
    count: int | None = None,
) -> list[VoteNotice]:
    notices = []

    for voter in tx.events[0].recipients[:count]:
        vote_tx, vote = cast_vote(
            ledger, voter, request, lambda query: observed, timestamp=20.0
        )
        ledger.commit_block([vote_tx])
        notices.append(
            VoteNotice(
                vr_txid=request.vr_txid, voter_id=voter, result=vote.result
            )
        )

    return notices


class TestVoterSelection:
    def test_distinct_and_sized(self) -> None:
        stakes = {f"r{index}": 10 for index in range(8)}
        voters = voter_selection(5, stakes, np.random.default_rng(1))

        assert len(voters) == len(set(voters)) == 5
        assert set(voters) <= stakes.keys()

    def test_deterministic_for_seed(self) -> None:
        stakes = {"a": 1, "b": 50, "c": 7, "d": 30}

        assert voter_selection(3, stakes, np.random.default_rng(9)) == (
            voter_selection(3, stakes, np.random.default_rng(9))
        )

    def test_deterministic_for_transaction(self) -> None:
        stakes = {f"r{index:02d}": 100 + index for index in range(11)}

        first = voter_selection(9, stakes, utils.derive_generator(4, "tx-1"))
        again = voter_selection(9, stakes, utils.derive_generator(4, "tx-1"))

        assert first == again

    def test_all_when_n_equals_pool(self) -> None:
        stakes = {"a": 1, "b": 2, "c": 3}
        voters = voter_selection(3, stakes, np.random.default_rng(0))

        assert sorted(voters) == ["a", "b", "c"]

    def test_too_many(self) -> None:
        stakes = {"a": 1, "b": 0, "c": 5}

        with pytest.raises(exceptions.InsufficientVotersError):
            voter_selection(3, stakes, np.random.default_rng(0))

    def test_zero_stake(self) -> None:
        with pytest.raises(exceptions.ZeroStakeError):
            voter_selection(1, {"a": 0, "b": 0}, np.random.default_rng(0))

    def test_proportional_to_stake(self) -> None:
        stakes = {"a": 10, "b": 90}
        rng = np.random.default_rng(3)
        heavy = sum(
            voter_selection(1, stakes, rng) == ["b"] for _ in range(2000)
        )

        assert 1700 < heavy < 1900

    def test_low_stake_kept_out_of_majority(self) -> None:
        stakes = {f"h{index}": 1000 for index in range(5)}
        stakes |= {f"v{index}": 12 for index in range(6)}
        rng = np.random.default_rng(11)

        majorities = sum(
            sum(voter.startswith("v") for voter in committee) >= 5
            for committee in (
                voter_selection(9, stakes, rng) for _ in range(2000)
            )
        )

        assert majorities < 20

    def test_eligible_excludes_creator(self, ledger: Ledger) -> None:
        eligible = eligible_participants(ledger, "r00")

        assert "r00" not in eligible
        assert len(eligible) == 11


class TestIncentives:
    def test_deltas_never_conflict(self, ledger: Ledger) -> None:
        txs = []
        for index in range(20):
            tx = ledger.begin("r01", float(index), "Reward")
            apply_incentives(ledger, tx, ["r00", "r02"], 3)
            txs.append(tx)

        block = ledger.commit_block(txs)

        assert all(block.valid_flags)
        assert ledger.aggregate_stake("r00") == 160
        assert ledger.aggregate_stake("r02") == 160

    def test_single_row_conflicts(self, ledger: Ledger) -> None:
        txs = []
        for index in range(20):
            tx = ledger.begin("r01", float(index), "Reward")
            reward_single_row(ledger, tx, "r00", 1)
            txs.append(tx)

        block = ledger.commit_block(txs)

        assert sum(block.valid_flags) == 1
        assert ledger.aggregate_stake("r00") == 101

    def test_reward_must_be_positive(self, ledger: Ledger) -> None:
        with pytest.raises(ValueError):
            apply_incentives(ledger, ledger.begin("r00", 0.0), ["r01"], 0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"reward": 0},
            {"submission_fee": -1},
            {"grace_period_ms": 0.0},
            {"voters_n": 0},
        ],
    )
    def test_bad_params(self, kwargs: dict) -> None:
        with pytest.raises(exceptions.InvalidConfigError):
            IncentiveParams(**kwargs)

    @pytest.mark.parametrize("voters, policy", [(1, 1), (4, 3), (9, 5)])
    def test_majority_policy(self, voters: int, policy: int) -> None:
        assert IncentiveParams().policy(voters) == policy


class TestRecordVerification:
    def test_verified(
        self, verified_ledger: Ledger, answer: RecordSet
    ) -> None:
        outcome = record_verification(verified_ledger, answer, "r07")

        assert outcome.verified
        assert outcome.update_txids == ()

    def test_empty_ledger(self, ledger: Ledger, answer: RecordSet) -> None:
        outcome = record_verification(ledger, answer, "r07")

        assert outcome.result == Status.UNVERIFIED
        assert outcome.previously_verified is None

    def test_update_pointers_for_participants(
        self, verified_ledger: Ledger, forged: RecordSet, answer: RecordSet
    ) -> None:
        creator = record_verification(verified_ledger, forged, "r00")
        validator = record_verification(verified_ledger, forged, "r01")
        outsider = record_verification(verified_ledger, forged, "r09")

        assert len(creator.update_txids) == 1
        assert validator.update_txids == creator.update_txids
        assert outsider.update_txids == ()
        assert outsider.previously_verified == answer

    def test_pending_record_does_not_verify(
        self,
        ledger: Ledger,
        answer: RecordSet,
        params: IncentiveParams,
    ) -> None:
        submit(ledger, answer, params)

        assert not record_verification(ledger, answer, "r05").verified


class TestQueryVote:
    def test_create_charges_fee_and_asks_voters(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        event = tx.events[0]
        entry = find_record(ledger, answer.query, request.vr_txid)

        assert event.name == EVENT_VALIDATION_REQUEST
        assert len(event.recipients) == params.voters_n
        assert "r00" not in event.recipients
        assert ValidationRequest.from_payload(event.payload) == request
        assert entry is not None
        assert entry.state == Status.UNVERIFIED
        assert entry.policy == 3
        assert ledger.aggregate_stake("r00") == 98

    def test_prohibited_below_threshold(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        ledger.enroll("poor", params.required_stake - 1)

        with pytest.raises(exceptions.SubmissionProhibitedError):
            create_or_update_record(
                ledger, answer, "poor", (), params, seed=0, timestamp=0.0
            )

    def test_validated_round(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        notices = vote_all(ledger, tx, request, answer)

        finish_tx, result = finish_validation(
            ledger, "r00", request, notices, params, timestamp=30.0
        )
        assert finish_tx is not None
        ledger.commit_block([finish_tx])

        entry = find_record(ledger, answer.query, request.vr_txid)
        assert result.status == FinishStatus.VALIDATED
        assert entry is not None
        assert entry.state == Status.VERIFIED
        assert entry.apv_ids == entry.val_ids
        assert ledger.aggregate_stake("r00") == 99
        for voter in entry.val_ids:
            assert ledger.aggregate_stake(voter) == 101
        assert record_verification(ledger, answer, "r11").verified

    def test_rejected_by_votes(
        self,
        ledger: Ledger,
        answer: RecordSet,
        forged: RecordSet,
        params: IncentiveParams,
    ) -> None:
        tx, request = submit(ledger, forged, params)
        notices = vote_all(ledger, tx, request, answer)

        finish_tx, result = finish_validation(
            ledger, "r00", request, notices, params, timestamp=30.0
        )
        assert finish_tx is not None
        ledger.commit_block([finish_tx])

        assert result.status == FinishStatus.REJECTED_VOTES
        assert set(result.rewarded) == set(tx.events[0].recipients)
        assert find_record(ledger, forged.query, request.vr_txid) is None
        assert ledger.aggregate_stake("r00") == 98

    def test_rejected_by_timeout(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        _, request = submit(ledger, answer, params)

        finish_tx, result = finish_validation(
            ledger, "r00", request, [], params, timestamp=30.0
        )
        assert finish_tx is not None
        ledger.commit_block([finish_tx])

        assert result.status == FinishStatus.REJECTED_TIMEOUT
        assert result.rewarded == ()
        assert find_record(ledger, answer.query, request.vr_txid) is None

    def test_partial_votes_below_policy(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        notices = vote_all(ledger, tx, request, answer, count=2)

        _, result = finish_validation(
            ledger, "r00", request, notices, params, timestamp=30.0
        )

        assert result.status == FinishStatus.REJECTED_VOTES
        assert len(result.approvers) == 2

    def test_unrecorded_notice_is_ignored(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        fake = [
            VoteNotice(
                vr_txid=request.vr_txid, voter_id=voter, result=VoteResult.YES
            )
            for voter in tx.events[0].recipients
        ]

        _, result = finish_validation(
            ledger, "r00", request, fake, params, timestamp=30.0
        )

        assert result.status == FinishStatus.REJECTED_TIMEOUT

    def test_update_replaces_stale_record(
        self,
        verified_ledger: Ledger,
        answer: RecordSet,
        forged: RecordSet,
        params: IncentiveParams,
    ) -> None:
        stale = record_verification(verified_ledger, forged, "r00")
        tx, request = submit(
            verified_ledger, forged, params, update_txids=stale.update_txids
        )
        notices = vote_all(verified_ledger, tx, request, forged)

        finish_tx, result = finish_validation(
            verified_ledger, "r00", request, notices, params, timestamp=30.0
        )
        assert finish_tx is not None
        verified_ledger.commit_block([finish_tx])

        assert result.deleted == stale.update_txids
        assert record_verification(verified_ledger, forged, "r09").verified
        assert not record_verification(verified_ledger, answer, "r09").verified

    def test_duplicate_vote(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        vote_all(ledger, tx, request, answer, count=1)
        voter = tx.events[0].recipients[0]

        with pytest.raises(exceptions.DuplicateVoteError):
            cast_vote(
                ledger, voter, request, lambda query: answer, timestamp=40.0
            )

    def test_outsider_cannot_vote(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        outsider = next(
            rid
            for rid in ledger.participants()
            if rid not in tx.events[0].recipients and rid != "r00"
        )

        with pytest.raises(exceptions.NotAValidatorError):
            cast_vote(
                ledger, outsider, request, lambda query: answer, timestamp=1.0
            )

    def test_missing_answer_votes_no(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        voter = tx.events[0].recipients[0]

        _, vote = cast_vote(
            ledger, voter, request, lambda query: None, timestamp=1.0
        )

        assert vote.result == VoteResult.NO

    def test_finish_twice_is_noop(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        _, request = submit(ledger, answer, params)
        finish_tx, _ = finish_validation(
            ledger, "r00", request, [], params, timestamp=30.0
        )
        assert finish_tx is not None
        ledger.commit_block([finish_tx])

        again, result = finish_validation(
            ledger, "r00", request, [], params, timestamp=31.0
        )

        assert again is None
        assert result.status == FinishStatus.NOOP

    def test_only_creator_finishes(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        _, request = submit(ledger, answer, params)

        with pytest.raises(exceptions.NotTheCreatorError):
            finish_validation(
                ledger, "r05", request, [], params, timestamp=30.0
            )

    def test_concurrent_finish_loses_mvcc(
        self, ledger: Ledger, answer: RecordSet, params: IncentiveParams
    ) -> None:
        tx, request = submit(ledger, answer, params)
        notices = vote_all(ledger, tx, request, answer)

        first, _ = finish_validation(
            ledger, "r00", request, notices, params, timestamp=30.0
        )
        second, _ = finish_validation(
            ledger, "r00", request, notices, params, timestamp=31.0
        )
        assert first is not None and second is not None

        block = ledger.commit_block([first, second])

        assert block.valid_flags == (True, False)
