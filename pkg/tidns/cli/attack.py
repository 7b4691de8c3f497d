from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import typing as t

from tidns import exceptions
from tidns import resources
from tidns import stats
from tidns import utils
from tidns.baselines import Scheme
from tidns.baselines import run_baseline
from tidns.cli import output
from tidns.hub import ReplicationHub
from tidns.simnet import run_campaign


if t.TYPE_CHECKING:
    from tidns import types as tt
    from tidns.config import ExperimentConfig
    from tidns.config import SweepPoint


LOG = logging.getLogger(__name__)

COLUMNS = (
    "scheme",
    "sweep",
    "replication",
    "attempts",
    "successes",
    "rate",
    "ci_low",
    "ci_high",
    "seed",
)


@dataclasses.dataclass(frozen=True, kw_only=True)
class AttackJob:
    scheme: Scheme
    point: SweepPoint
    config: ExperimentConfig
    replication: int
    seed: int


@dataclasses.dataclass(frozen=True, kw_only=True)
class AttackRow:
    scheme: Scheme
    sweep: str
    replication: int
    attempts: int
    successes: int
    seed: int

    @property
    def rate(self) -> float:
        return self.successes / self.attempts if self.attempts else 0.0

    @property
    def interval(self) -> tuple[float, float]:
        return stats.wilson_interval(self.successes, self.attempts)

    def to_row(self) -> dict[str, t.Any]:
        ci_low, ci_high = self.interval

        return {
            "scheme": self.scheme.value,
            "sweep": self.sweep,
            "replication": self.replication,
            "attempts": self.attempts,
            "successes": self.successes,
            "rate": f"{self.rate:.6e}",
            "ci_low": f"{ci_low:.6e}",
            "ci_high": f"{ci_high:.6e}",
            "seed": self.seed,
        }


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "attack",
        description="Run attack resistance campaigns and print CSV rows",
    )
    output.add_experiment_arguments(subparser)
    subparser.set_defaults(func=main)


def main(options: argparse.Namespace) -> None:
    config = output.load_config(options)
    if config.experiment.full:
        estimate_runtime(config)

    with resources.measure("attack experiment"):
        rows = run_attack_experiment(config)

    output.write_csv(
        config.experiment.out, COLUMNS, (row.to_row() for row in rows)
    )


def make_jobs(config: ExperimentConfig) -> list[AttackJob]:
    jobs = []

    for scheme in config.experiment.schemes:
        if scheme == Scheme.DNSSEC:
            raise exceptions.InvalidConfigError(
                "experiment", "dnssec has no attack model"
            )

        for point, point_config in config.sweep_points():
            for replication in range(config.experiment.replications):
                jobs.append(
                    AttackJob(
                        scheme=scheme,
                        point=point,
                        config=point_config,
                        replication=replication,
                        seed=utils.derive_seed(
                            config.sim.seed, "replication", replication
                        ),
                    )
                )

    return jobs


def run_attack_experiment(config: ExperimentConfig) -> list[AttackRow]:
    """One row per scheme, sweep point and replication.

    Replications of one point share seeds across schemes, so comparisons
    run on identical randomness.
    """

    jobs = make_jobs(config)
    LOG.info(
        "Run %d attack replications of %d attempts",
        len(jobs),
        config.sim.attempts,
    )

    with ReplicationHub(num_workers=config.experiment.workers) as hub:
        return hub.run_all(run_attack_job, jobs)


def run_attack_job(job: AttackJob) -> AttackRow:
    config = job.config
    sim = config.sim.replace(seed=job.seed)

    if job.scheme == Scheme.TIDNS:
        successes = run_campaign(
            sim,
            config.incentive,
            block_size=config.pipeline.block_size,
            block_interval_ms=config.pipeline.block_interval_ms,
            stake_samples=config.experiment.stake_samples,
        ).successes
    else:
        successes = run_baseline(job.scheme, config.baseline, sim)

    LOG.info(
        "%s at %s, replication %d: %d of %d",
        job.scheme.value,
        job.point,
        job.replication,
        successes,
        sim.attempts,
    )

    return AttackRow(
        scheme=job.scheme,
        sweep=str(job.point),
        replication=job.replication,
        attempts=sim.attempts,
        successes=successes,
        seed=job.seed,
    )


def estimate_runtime(
    config: ExperimentConfig, *, pilot_attempts: int = 1_000
) -> tt.TimeSeconds:
    """Time a short pilot of every scheme and extrapolate to the full run."""

    jobs = make_jobs(config)
    pilot = config.replace(sim=config.sim.replace(attempts=pilot_attempts))
    seconds = 0.0

    for scheme in config.experiment.schemes:
        job = AttackJob(
            scheme=scheme,
            point=jobs[0].point,
            config=pilot,
            replication=0,
            seed=config.sim.seed,
        )
        with resources.measure(f"{scheme.value} pilot") as measurement:
            run_attack_job(job)

        usage = t.cast(resources.Usage, measurement.usage)
        scheme_jobs = sum(1 for item in jobs if item.scheme == scheme)
        seconds += (
            usage.wall * scheme_jobs * config.sim.attempts / pilot_attempts
        )

    workers = config.experiment.workers or os.cpu_count() or 1
    estimate = seconds / min(workers, len(jobs))
    LOG.warning(
        "Full run of %d jobs is estimated to take %.0f seconds",
        len(jobs),
        estimate,
    )

    return estimate
