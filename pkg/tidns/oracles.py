"""Self-checks over the whole system, used by the selftest command.

Every suite runs at a quick smoke scale by default and at acceptance
scale when asked for the full run.
"""

from __future__ import annotations

import dataclasses
import logging
import random
import typing as t

import numpy as np

from tidns import exceptions
from tidns import resources
from tidns import stats
from tidns.baselines import BaselineParams
from tidns.baselines import Scheme
from tidns.baselines import run_baseline
from tidns.contracts import FinishStatus
from tidns.contracts import IncentiveParams
from tidns.contracts import VoteNotice
from tidns.contracts import apply_incentives
from tidns.contracts import cast_vote
from tidns.contracts import create_or_update_record
from tidns.contracts import find_record
from tidns.contracts import finish_validation
from tidns.contracts import record_verification
from tidns.contracts import reward_single_row
from tidns.contracts import seed_verified_record
from tidns.contracts import voter_selection
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import Rcode
from tidns.dnscore import RecordSet
from tidns.dnscore import Status
from tidns.dnscore import WireMessage
from tidns.dnscore import wire_decode
from tidns.dnscore import wire_encode
from tidns.ledger import Ledger
from tidns.simnet import SimParams
from tidns.simnet import closed_form_poison_prob
from tidns.simnet import kaminsky_attempt
from tidns.simnet import run_campaign
from tidns.simnet import sample_txids


if t.TYPE_CHECKING:
    from tidns import types as tt


LOG = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, kw_only=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    usage: resources.Usage | None = None


Suite = t.Callable[[bool], SuiteResult]
SUITES: dict[str, Suite] = {}


def suite(name: str) -> t.Callable[[Suite], Suite]:
    def decorator(func: Suite) -> Suite:
        SUITES[name] = func
        return func

    return decorator


@suite("poisoning-oracle")
def check_poisoning_oracle(full: bool) -> SuiteResult:
    trials = 100_000 if full else 5_000
    rng = np.random.Generator(np.random.PCG64(1))
    failures = []

    for space in (256, 65536):
        for outstanding in (1, 50):
            for packets in (10, 1000):
                params = SimParams(
                    txid_space=space, outstanding=outstanding, attempts=0
                )
                expected = closed_form_poison_prob(
                    space, outstanding, min(packets, space)
                )
                hits = sum(
                    kaminsky_attempt(
                        sample_txids(rng, space, outstanding),
                        params,
                        rng,
                        packets=packets,
                    )
                    for _ in range(trials)
                )
                if not stats.within_binomial_sigmas(hits, trials, expected):
                    failures.append(
                        f"I={space},D={outstanding},F={packets}: "
                        f"{hits}/{trials} vs p={expected:.4g}"
                    )

    return SuiteResult(
        name="poisoning-oracle",
        passed=not failures,
        detail="; ".join(failures) or f"8 cells x {trials} trials",
    )


@suite("voter-selection")
def check_voter_selection(full: bool) -> SuiteResult:
    draws = 100_000 if full else 10_000
    stakes = {"p10": 10, "p20": 20, "p30": 30, "p40": 40}
    rng = np.random.default_rng(7)
    counts = dict.fromkeys(stakes, 0)

    for _ in range(draws):
        counts[voter_selection(1, stakes, rng)[0]] += 1

    pvalue = stats.proportionality_pvalue(
        list(counts.values()), list(stakes.values())
    )

    return SuiteResult(
        name="voter-selection",
        passed=pvalue > 0.01,
        detail=f"chi-square p={pvalue:.4f} over {draws} draws",
    )


@suite("mvcc-delta")
def check_mvcc_delta(full: bool) -> SuiteResult:
    count = 100

    delta_ledger = Ledger()
    delta_ledger.enroll("r00", 100)
    delta_txs = []
    for index in range(count):
        tx = delta_ledger.begin("r01", float(index), "Reward")
        apply_incentives(delta_ledger, tx, ["r00"], 1)
        delta_txs.append(tx)
    delta_block = delta_ledger.commit_block(delta_txs)
    delta_valid = sum(delta_block.valid_flags)

    row_ledger = Ledger()
    row_ledger.enroll("r00", 100)
    row_txs = []
    for index in range(count):
        tx = row_ledger.begin("r01", float(index), "Reward")
        reward_single_row(row_ledger, tx, "r00", 1)
        row_txs.append(tx)
    row_block = row_ledger.commit_block(row_txs)
    row_invalid = count - sum(row_block.valid_flags)

    return SuiteResult(
        name="mvcc-delta",
        passed=delta_valid == count and row_invalid >= count - 1,
        detail=(
            f"delta: {delta_valid}/{count} valid, "
            f"single row: {row_invalid}/{count} invalid"
        ),
    )


class QueryVoteSchedule:
    """One randomized life of a record through Query Vote rounds."""

    rng: random.Random
    ledger: Ledger
    params: IncentiveParams
    resolvers: list[tt.ResolverID]
    query: Query
    fees: tt.Stake
    rewards: tt.Stake
    clock: float

    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)  # noqa: DUO102
        self.ledger = Ledger()
        count = self.rng.randint(3, 12)
        self.params = IncentiveParams(voters_n=self.rng.randint(1, count - 1))
        self.resolvers = [f"r{index:02d}" for index in range(count)]
        self.query = Query("www.example.test", QType.A)
        self.fees = 0
        self.rewards = 0
        self.clock = 0.0

        for resolver_id in self.resolvers:
            self.ledger.enroll(resolver_id, self.params.initial_stake)

    def now(self) -> float:
        self.clock += 1.0
        return self.clock

    def answer(self) -> RecordSet:
        address = self.rng.choice(["192.0.2.1", "198.51.100.7", "10.9.9.9"])
        return RecordSet.create(self.query, [address])

    def run(self) -> list[str]:
        problems = []

        if self.rng.random() < 0.5:
            self.ledger.commit_block(
                [
                    seed_verified_record(
                        self.ledger,
                        self.answer(),
                        self.resolvers[0],
                        self.resolvers[1:],
                    )
                ]
            )

        for _ in range(self.rng.randint(1, 4)):
            problems.extend(self.round())

        expected = (
            len(self.resolvers) * self.params.initial_stake
            - self.fees
            + self.rewards
        )
        total = sum(self.ledger.participants().values())
        if total != expected:
            problems.append(f"stake {total} != {expected}")

        return problems

    def round(self) -> list[str]:
        creator = self.rng.choice(self.resolvers)
        answer = self.answer()
        outcome = record_verification(self.ledger, answer, creator)
        if outcome.verified:
            return []

        try:
            tx, request = create_or_update_record(
                self.ledger,
                answer,
                creator,
                outcome.update_txids,
                self.params,
                seed=self.rng.getrandbits(32),
                timestamp=self.now(),
            )
        except exceptions.ContractError:
            return []

        if not self.ledger.commit_block([tx]).valid_flags[0]:
            return ["create transaction is invalid"]
        self.fees += self.params.submission_fee

        problems = []
        notices = []
        for voter in tx.events[0].recipients:
            action = self.rng.choice(["yes", "no", "abstain"])
            if action == "abstain":
                continue

            observed = answer if action == "yes" else self.answer()
            vote_tx, vote = cast_vote(
                self.ledger,
                voter,
                request,
                lambda query, observed=observed: observed,
                timestamp=self.now(),
            )
            self.ledger.commit_block([vote_tx])
            if self.rng.random() < 0.8:
                notices.append(
                    VoteNotice(
                        vr_txid=request.vr_txid,
                        voter_id=voter,
                        result=vote.result,
                    )
                )

            try:
                cast_vote(
                    self.ledger,
                    voter,
                    request,
                    lambda query: answer,
                    timestamp=self.now(),
                )
            except exceptions.DuplicateVoteError:
                pass
            else:
                problems.append(f"{voter} voted twice on {request.vr_txid}")

        finish_tx, result = finish_validation(
            self.ledger,
            creator,
            request,
            notices,
            self.params,
            timestamp=self.now(),
        )
        if finish_tx is None:
            return [*problems, f"{request.vr_txid} finished as noop"]
        if not self.ledger.commit_block([finish_tx]).valid_flags[0]:
            return [*problems, "finish transaction is invalid"]
        self.rewards += len(result.rewarded) * self.params.reward

        entry = find_record(self.ledger, self.query, request.vr_txid)
        match result.status:
            case FinishStatus.VALIDATED:
                if entry is None or entry.state != Status.VERIFIED:
                    problems.append(f"{request.vr_txid} lost after validation")
                elif len(entry.apv_ids) < entry.policy:
                    problems.append(
                        f"{request.vr_txid} verified without quorum"
                    )
            case _:
                if entry is not None:
                    problems.append(f"{request.vr_txid} survived rejection")

        return problems


@suite("query-vote")
def check_query_vote(full: bool) -> SuiteResult:
    schedules = 10_000 if full else 300
    problems = []

    for seed in range(schedules):
        problems.extend(QueryVoteSchedule(seed).run())

    return SuiteResult(
        name="query-vote",
        passed=not problems,
        detail="; ".join(problems[:5]) or f"{schedules} schedules",
    )


@suite("attack-resistance")
def check_attack_resistance(full: bool) -> SuiteResult:
    attempts = 100_000 if full else 2_000
    sim = SimParams(packet_rate=5000.0, seed=11, attempts=attempts)
    tidns = run_campaign(sim).successes
    harddns = run_baseline(Scheme.HARDDNS, BaselineParams(), sim)
    upper = stats.wilson_interval(tidns, attempts)[1]

    passed = tidns <= harddns
    if full:
        passed = upper <= 1e-4 and tidns * 10 <= harddns

    return SuiteResult(
        name="attack-resistance",
        passed=passed,
        detail=(
            f"tidns {tidns}/{attempts} (upper {upper:.2e}), "
            f"harddns {harddns}/{attempts}"
        ),
    )


@suite("scheme-ordering")
def check_scheme_ordering(full: bool) -> SuiteResult:
    attempts = 100_000 if full else 20_000
    sim = SimParams(packet_rate=10_000.0, seed=13, attempts=attempts)
    campaign_attempts = attempts if full else 1_000

    successes = {
        Scheme.TIDNS: run_campaign(
            sim.replace(attempts=campaign_attempts)
        ).successes
        * attempts
        // campaign_attempts
    }
    for scheme in (Scheme.HARDDNS, Scheme.ODD, Scheme.DEPENDNS):
        successes[scheme] = run_baseline(scheme, BaselineParams(), sim)

    order = [Scheme.TIDNS, Scheme.HARDDNS, Scheme.ODD, Scheme.DEPENDNS]
    problems = []
    for lower, higher in zip(order, order[1:]):
        low, high = successes[lower], successes[higher]
        if low > high:
            problems.append(f"{lower.value} above {higher.value}")
        elif min(low, high) > 10 and stats.intervals_overlap(
            stats.wilson_interval(low, attempts),
            stats.wilson_interval(high, attempts),
        ):
            problems.append(f"{lower.value} overlaps {higher.value}")

    return SuiteResult(
        name="scheme-ordering",
        passed=not problems,
        detail="; ".join(problems)
        or ", ".join(f"{s.value}={n}" for s, n in successes.items()),
    )


@suite("trends")
def check_trends(full: bool) -> SuiteResult:
    attempts = 100_000 if full else 500
    base = SimParams(packet_rate=10_000.0, seed=17, attempts=attempts)
    problems = []

    by_attacked = []
    for attacked in (5, 7, 9, 11):
        by_attacked.append(
            run_campaign(base.replace(attacked=attacked)).successes
        )
    for previous, current in zip(by_attacked, by_attacked[1:]):
        if stats.wilson_interval(current, attempts)[1] < (
            stats.wilson_interval(previous, attempts)[0]
        ):
            problems.append(f"rate falls with A: {by_attacked}")
            break

    small = run_campaign(base.replace(voters=3)).successes
    large = run_campaign(base.replace(voters=11)).successes
    if small > 3 * max(large, 1):
        problems.append(f"V=3 gives {small}, V=11 gives {large}")

    return SuiteResult(
        name="trends",
        passed=not problems,
        detail="; ".join(problems)
        or f"A sweep {by_attacked}, V=3 {small}, V=11 {large}",
    )


@suite("stake-dynamics")
def check_stake_dynamics(full: bool) -> SuiteResult:
    attempts = 10_000 if full else 300
    result = run_campaign(
        SimParams(seed=19, attempts=attempts), stake_samples=20
    )
    first = result.stake_samples[0].victim_share
    last = result.stake_samples[-1].victim_share

    return SuiteResult(
        name="stake-dynamics",
        passed=last < first,
        detail=f"victim share {first:.4f} -> {last:.4f}",
    )


@suite("determinism")
def check_determinism(full: bool) -> SuiteResult:
    from tidns.cli import output
    from tidns.cli.attack import COLUMNS
    from tidns.cli.attack import run_attack_experiment
    from tidns.config import ExperimentConfig

    config = ExperimentConfig().with_overrides(
        seed=23,
        attempts=2_000 if full else 200,
        schemes=list(Scheme)[:4],
        workers=1,
    )
    rendered = [
        output.render_csv(
            COLUMNS, [row.to_row() for row in run_attack_experiment(config)]
        )
        for _ in range(2)
    ]

    return SuiteResult(
        name="determinism",
        passed=rendered[0] == rendered[1],
        detail=f"{len(rendered[0])} bytes of CSV",
    )


@suite("ledger-bench")
def check_ledger_bench(full: bool) -> SuiteResult:
    from tidns.cli.ledgerbench import BenchOperation
    from tidns.cli.ledgerbench import bench_operation
    from tidns.config import PipelineParams

    pipeline = PipelineParams(duration_s=10.0 if full else 2.0)
    problems = []

    for operation in BenchOperation:
        capacity = 1000.0 / operation.service_ms(pipeline)
        light = bench_operation(operation, 50.0, pipeline)
        heavy = bench_operation(operation, 2 * capacity, pipeline)
        if light is None or heavy is None:
            problems.append(f"{operation.value}: empty run")
            continue

        tolerance = 0.02 if full else 0.06
        if abs(light.throughput - 50.0) > tolerance * 50.0:
            problems.append(f"{operation.value}: light {light.throughput:.1f}")
        if abs(heavy.throughput - capacity) > 0.05 * capacity:
            problems.append(f"{operation.value}: heavy {heavy.throughput:.1f}")
        if heavy.mean_latency_ms < 2 * light.mean_latency_ms:
            problems.append(f"{operation.value}: latency does not inflate")

    return SuiteResult(
        name="ledger-bench",
        passed=not problems,
        detail="; ".join(problems) or "plateau and inflation hold",
    )


def random_message(rng: random.Random) -> WireMessage:
    labels = [
        "".join(rng.choices("abcdefghij", k=rng.randint(1, 8)))
        for _ in range(rng.randint(1, 3))
    ]
    qtype = rng.choice(list(QType))
    query = Query(".".join(labels) + ".test", qtype)

    def rdata() -> str:
        match qtype:
            case QType.A:
                return f"192.0.2.{rng.randint(0, 255)}"
            case QType.AAAA:
                return f"2001:db8::{rng.randint(1, 0xFFFF):x}"

        return f"ns{rng.randint(0, 99)}.example.test"

    def record() -> RecordSet:
        return RecordSet.create(
            query,
            [rdata() for _ in range(rng.randint(1, 3))],
            rng.randint(0, 86400),
        )

    if not rng.getrandbits(1):
        return WireMessage(id=rng.getrandbits(16), query=query)

    rcode = Rcode.NOERROR
    answer = None
    match rng.choice(["positive", "negative", "empty"]):
        case "positive":
            answer = record()
        case "negative":
            answer = RecordSet.nxdomain(query)
            rcode = Rcode.NXDOMAIN

    status = rng.choice([None, Status.VERIFIED, Status.UNVERIFIED])

    return WireMessage(
        id=rng.getrandbits(16),
        query=query,
        is_response=True,
        rcode=rcode,
        answer=answer,
        status=status,
        previously_verified=(
            record()
            if status == Status.UNVERIFIED and rng.random() < 0.5
            else None
        ),
    )


@suite("wire")
def check_wire(full: bool) -> SuiteResult:
    from tidns.resolver import LedgerResolver
    from tidns.resolver import ResolverNode
    from tidns.simnet import Zone
    from tidns.simnet import ZoneUpstream

    messages = 10_000 if full else 1_000
    rng = random.Random(29)  # noqa: DUO102
    problems = []

    for _ in range(messages):
        message = random_message(rng)
        if wire_decode(wire_encode(message)) != message:
            problems.append(f"round trip of {message.query} differs")

    answer = RecordSet.create(Query("www.foo.com", QType.A), ["192.0.2.1"])
    ledger = Ledger()
    for resolver_id in ("r00", "r01", "r02", "r03"):
        ledger.enroll(resolver_id, 100)
    ledger.commit_block(
        [seed_verified_record(ledger, answer, "r00", ["r01", "r02", "r03"])]
    )
    node = ResolverNode(
        "r00",
        ledger=ledger,
        params=IncentiveParams(),
        upstream=ZoneUpstream(Zone({answer.query: answer})),
        host=NullHost(),
    )
    reply = wire_decode(
        LedgerResolver(node, lambda: 0.0).answer_packet(
            wire_encode(WireMessage(id=4242, query=answer.query))
        )
    )
    if reply.id != 4242 or reply.status != Status.VERIFIED:
        problems.append(f"served {reply.status} for a verified name")

    return SuiteResult(
        name="wire",
        passed=not problems,
        detail="; ".join(problems[:5]) or f"{messages} messages",
    )


class NullHost:
    def submit(self, tx: t.Any) -> None:
        pass

    def call_later(self, *args: t.Any, **kwargs: t.Any) -> None:
        pass


def run_suites(
    names: t.Iterable[str] | None = None, *, full: bool = False
) -> list[SuiteResult]:
    results = []

    for name in names or SUITES:
        with resources.measure(f"suite {name}") as measurement:
            try:
                result = SUITES[name](full)
            except Exception as exc:
                LOG.exception("Suite %s has crashed", name)
                result = SuiteResult(name=name, passed=False, detail=str(exc))

        result = dataclasses.replace(result, usage=measurement.usage)
        if not result.passed:
            LOG.error("Suite %s has failed: %s", name, result.detail)
        results.append(result)

    return results
