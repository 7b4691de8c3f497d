from __future__ import annotations

import argparse
import dataclasses
import enum
import logging
import math
import typing as t

from tidns import resources
from tidns.cli import output
from tidns.contracts import IncentiveParams
from tidns.contracts import VoteNotice
from tidns.contracts import cast_vote
from tidns.contracts import create_or_update_record
from tidns.contracts import finish_validation
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet
from tidns.ledger import Ledger
from tidns.ledger import Orderer
from tidns.ledger import TxValidationCode
from tidns.ledger import VoteResult


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.config import ExperimentConfig
    from tidns.config import PipelineParams
    from tidns.contracts import ValidationRequest
    from tidns.ledger import Block
    from tidns.ledger import Transaction


LOG = logging.getLogger(__name__)

COLUMNS = (
    "operation",
    "send_rate_tps",
    "transactions",
    "throughput_tps",
    "mean_latency_ms",
)

BENCH_STAKE = 10**9
BENCH_ADDRESS = "192.0.2.53"


class BenchOperation(enum.Enum):
    CREATE_OR_UPDATE = "create_or_update"
    VOTING = "voting"
    FINISH_VALIDATION = "finish_validation"

    def service_ms(self, pipeline: PipelineParams) -> tt.TimeMs:
        match self:
            case BenchOperation.CREATE_OR_UPDATE:
                return pipeline.create_service_ms
            case BenchOperation.VOTING:
                return pipeline.vote_service_ms

        return pipeline.finish_service_ms


@dataclasses.dataclass(frozen=True, kw_only=True)
class BenchRow:
    operation: BenchOperation
    send_rate: float
    transactions: int
    throughput: float
    mean_latency_ms: tt.TimeMs

    def to_row(self) -> dict[str, t.Any]:
        return {
            "operation": self.operation.value,
            "send_rate_tps": f"{self.send_rate:g}",
            "transactions": self.transactions,
            "throughput_tps": f"{self.throughput:.3f}",
            "mean_latency_ms": f"{self.mean_latency_ms:.3f}",
        }


class Workload:
    """Endorses real contract transactions for one benchmarked operation.

    Whatever the operation depends on (pending records, cast votes) is
    committed up front and is not timed.
    """

    operation: BenchOperation
    ledger: Ledger
    params: IncentiveParams
    resolvers: list[tt.ResolverID]
    seed: tt.Seed
    requests: list[ValidationRequest]
    creators: dict[tt.TxID, tt.ResolverID]
    voters: dict[tt.TxID, list[tt.ResolverID]]
    jobs: list[tuple[ValidationRequest, tt.ResolverID]]

    def __init__(
        self,
        operation: BenchOperation,
        ledger: Ledger,
        *,
        resolvers: int,
        count: int,
        seed: tt.Seed = 0,
    ) -> None:
        self.operation = operation
        self.ledger = ledger
        self.params = IncentiveParams(
            initial_stake=BENCH_STAKE, voters_n=min(9, resolvers - 1)
        )
        self.resolvers = [f"r{index:02d}" for index in range(resolvers)]
        self.seed = seed
        self.requests = []
        self.creators = {}
        self.voters = {}
        self.jobs = []

        for resolver_id in self.resolvers:
            ledger.enroll(resolver_id, self.params.initial_stake)

        match operation:
            case BenchOperation.VOTING:
                self.prepare_records(math.ceil(count / self.params.voters_n))
                self.jobs = [
                    (request, voter)
                    for request in self.requests
                    for voter in self.voters[request.vr_txid]
                ]
            case BenchOperation.FINISH_VALIDATION:
                self.prepare_records(count)
                self.prepare_votes()
                self.jobs = [
                    (request, self.creators[request.vr_txid])
                    for request in self.requests
                ]

    def answer(self, index: int, label: str) -> RecordSet:
        return RecordSet.create(
            Query(f"{label}{index}.bench.test", QType.A), [BENCH_ADDRESS]
        )

    def create(self, index: int, label: str, now: tt.TimeMs) -> Transaction:
        tx, request = create_or_update_record(
            self.ledger,
            self.answer(index, label),
            self.resolvers[index % len(self.resolvers)],
            (),
            self.params,
            seed=self.seed,
            timestamp=now,
        )
        self.requests.append(request)
        self.creators[request.vr_txid] = tx.submitter
        self.voters[request.vr_txid] = list(tx.events[0].recipients)

        return tx

    def vote(
        self, request: ValidationRequest, voter_id: tt.ResolverID, now: float
    ) -> Transaction:
        tx, _ = cast_vote(
            self.ledger,
            voter_id,
            request,
            lambda query: request.answer,
            timestamp=now,
        )

        return tx

    def prepare_records(self, count: int) -> None:
        txs = [self.create(index, "pre", 0.0).seal() for index in range(count)]
        if txs:
            self.ledger.commit_block(txs)

    def prepare_votes(self) -> None:
        txs = [
            self.vote(request, voter, 0.0).seal()
            for request in self.requests
            for voter in self.voters[request.vr_txid]
        ]
        if txs:
            self.ledger.commit_block(txs)

    def make(self, index: int, now: tt.TimeMs) -> Transaction:
        if self.operation == BenchOperation.CREATE_OR_UPDATE:
            return self.create(index, "bench", now)

        request, resolver_id = self.jobs[index]
        if self.operation == BenchOperation.VOTING:
            return self.vote(request, resolver_id, now)

        tx, _ = finish_validation(
            self.ledger,
            resolver_id,
            request,
            [
                VoteNotice(
                    vr_txid=request.vr_txid,
                    voter_id=voter,
                    result=VoteResult.YES,
                )
                for voter in self.voters[request.vr_txid]
            ],
            self.params,
            timestamp=now,
        )
        if tx is None:
            raise RuntimeError(f"{request.vr_txid} is already finished")

        return tx


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "ledgerbench",
        description="Benchmark the write pipeline of the ledger",
    )
    output.add_experiment_arguments(subparser)
    subparser.set_defaults(func=main)


def main(options: argparse.Namespace) -> None:
    config = output.load_config(options)
    with resources.measure("ledgerbench experiment"):
        rows = run_ledger_bench(config)

    output.write_csv(
        config.experiment.out, COLUMNS, (row.to_row() for row in rows)
    )


def run_ledger_bench(config: ExperimentConfig) -> list[BenchRow]:
    rows = []

    for operation in BenchOperation:
        for rate in config.pipeline.send_rates:
            row = bench_operation(
                operation, rate, config.pipeline, seed=config.sim.seed
            )
            if row is not None:
                rows.append(row)

    return rows


def bench_operation(
    operation: BenchOperation,
    rate: float,
    pipeline: PipelineParams,
    *,
    seed: tt.Seed = 0,
) -> BenchRow | None:
    """Send transactions at a constant rate through the pipeline.

    Blocks are cut by size or interval; a single validator then handles
    block after block, spending the operation's service time on every
    transaction. A transaction completes when its block is validated.
    """

    count = int(rate * pipeline.duration_s)
    if count == 0:
        return None

    ledger = Ledger()
    workload = Workload(
        operation,
        ledger,
        resolvers=pipeline.resolvers,
        count=count,
        seed=seed,
    )
    orderer = Orderer(
        ledger,
        block_size=pipeline.block_size,
        block_interval_ms=pipeline.block_interval_ms,
    )
    cuts: list[tuple[tt.TimeMs, Block]] = []
    arrivals: dict[tt.TxID, tt.TimeMs] = {}
    gap = 1000.0 / rate

    for index in range(count):
        now = index * gap
        due_at = orderer.due_at
        if due_at is not None and now >= due_at:
            if (block := orderer.tick(now)) is not None:
                cuts.append((due_at, block))

        tx = workload.make(index, now)
        arrivals[tx.tx_id] = now
        if (block := orderer.submit(tx, now)) is not None:
            cuts.append((now, block))

    while (due_at := orderer.due_at) is not None:
        if (block := orderer.tick(due_at)) is not None:
            cuts.append((due_at, block))

    service = operation.service_ms(pipeline)
    validator_free_at = 0.0
    latencies = []

    for cut_at, block in cuts:
        validator_free_at = (
            max(validator_free_at, cut_at)
            + len(block.transactions) * service
        )
        for tx, code in zip(block.transactions, block.validation_codes):
            if code == TxValidationCode.VALID:
                latencies.append(validator_free_at - arrivals[tx.tx_id])

    invalid = count - len(latencies)
    if invalid:
        LOG.warning(
            "%d of %d %s transactions are invalid",
            invalid,
            count,
            operation.value,
        )

    row = BenchRow(
        operation=operation,
        send_rate=rate,
        transactions=count,
        throughput=(
            len(latencies) / validator_free_at * 1000.0
            if validator_free_at > 0
            else 0.0
        ),
        mean_latency_ms=sum(latencies) / len(latencies) if latencies else 0.0,
    )
    LOG.info(
        "%s at %g tps: %.1f tps, %.1f ms",
        operation.value,
        rate,
        row.throughput,
        row.mean_latency_ms,
    )

    return row
