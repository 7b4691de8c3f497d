from __future__ import annotations

import argparse
import dataclasses
import logging
import typing as t

import numpy as np

from tidns import resources
from tidns import stats
from tidns import utils
from tidns.baselines import Scheme
from tidns.cli import output


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.config import ExperimentConfig
    from tidns.config import PerfParams


LOG = logging.getLogger(__name__)

COLUMNS = (
    "scheme",
    "send_rate",
    "mean_latency_ms",
    "p95_latency_ms",
    "throughput_qps",
)


@dataclasses.dataclass(frozen=True, kw_only=True)
class PerfRow:
    scheme: Scheme
    send_rate: float
    mean_latency_ms: tt.TimeMs
    p95_latency_ms: tt.TimeMs
    throughput: float

    def to_row(self) -> dict[str, t.Any]:
        return {
            "scheme": self.scheme.value,
            "send_rate": f"{self.send_rate:g}",
            "mean_latency_ms": f"{self.mean_latency_ms:.3f}",
            "p95_latency_ms": f"{self.p95_latency_ms:.3f}",
            "throughput_qps": f"{self.throughput:.3f}",
        }


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "perf",
        description="Model resolution latency and throughput per scheme",
    )
    output.add_experiment_arguments(subparser)
    subparser.set_defaults(func=main)


def main(options: argparse.Namespace) -> None:
    config = output.load_config(options)
    with resources.measure("perf experiment"):
        rows = run_perf_experiment(config)

    output.write_csv(
        config.experiment.out, COLUMNS, (row.to_row() for row in rows)
    )


def run_perf_experiment(config: ExperimentConfig) -> list[PerfRow]:
    rows = []

    for scheme in config.experiment.schemes:
        for rate in config.perf.send_rates:
            row = model_scheme(scheme, rate, config.perf, seed=config.sim.seed)
            if row is not None:
                rows.append(row)

    return rows


def resolver_cost(scheme: Scheme, perf: PerfParams) -> tt.TimeMs:
    cost = perf.resolver_service_ms

    match scheme:
        case Scheme.TIDNS:
            cost += perf.ledger_read_ms
        case Scheme.DEPENDNS:
            cost += perf.dependns_scoring_ms
        case Scheme.DNSSEC:
            cost += perf.dnssec_ms
        case Scheme.ODD if perf.under_attack:
            cost += perf.dnssec_ms

    return cost


def fan_out(scheme: Scheme, perf: PerfParams) -> int:
    if scheme in {Scheme.HARDDNS, Scheme.DEPENDNS}:
        return perf.consulted

    return 1


def lindley_departures(
    arrivals: np.ndarray, service: np.ndarray | tt.TimeMs
) -> np.ndarray:
    """Departure times of a FIFO single server, arrivals sorted."""

    services = np.broadcast_to(service, arrivals.shape)
    departures = np.empty_like(arrivals)
    free_at = -np.inf

    for index, arrived in enumerate(arrivals):
        free_at = max(free_at, arrived) + services[index]
        departures[index] = free_at

    return departures


def model_scheme(
    scheme: Scheme, rate: float, perf: PerfParams, *, seed: int
) -> PerfRow | None:
    """Latency of one scheme under Poisson arrivals at rate qps.

    A query waits for the resolver, then misses go upstream. Quorum
    schemes send one exchange per consulted resolver and wait for the
    slowest; every exchange queues at the authoritative server.
    """

    rng = np.random.Generator(
        np.random.PCG64(utils.derive_seed(seed, "perf", scheme.value, rate))
    )
    count = int(rate * perf.duration_s)
    if count == 0:
        return None

    arrivals = np.cumsum(rng.exponential(1000.0 / rate, size=count))
    hits = rng.random(count) < perf.cache_hit_ratio

    cost = np.full(count, resolver_cost(scheme, perf))
    if scheme == Scheme.TIDNS:
        # a verified cache hit skips the ledger read
        cost[hits] = perf.resolver_service_ms

    departures = lindley_departures(arrivals, cost)

    finished = departures.copy()
    misses = np.flatnonzero(~hits)
    width = fan_out(scheme, perf)

    if len(misses):
        sent = np.repeat(departures[misses], width)
        order = np.argsort(sent, kind="stable")
        served = np.empty_like(sent)
        served[order] = lindley_departures(
            sent[order], perf.upstream_service_ms
        )
        network = perf.upstream_base_ms + rng.exponential(
            perf.upstream_jitter_ms, size=len(sent)
        )
        exchanges = (served + network).reshape(len(misses), width)
        finished[misses] = exchanges.max(axis=1)

    latencies = finished - arrivals
    makespan = finished.max() - arrivals[0]

    return PerfRow(
        scheme=scheme,
        send_rate=rate,
        mean_latency_ms=float(latencies.mean()),
        p95_latency_ms=stats.percentile(latencies, 95),
        throughput=count / makespan * 1000.0 if makespan > 0 else 0.0,
    )
