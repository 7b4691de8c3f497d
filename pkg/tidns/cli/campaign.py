from __future__ import annotations

import argparse
import logging
import pathlib
import typing as t

from tidns import exceptions
from tidns import resources
from tidns.cli import printlib
from tidns.config import ExperimentConfig
from tidns.ledger import save_ledger_to
from tidns.ledger.archive import sniff
from tidns.simnet import Topology
from tidns.simnet import export_trace
from tidns.simnet import run_campaign
from tidns.simnet import run_event_loop


if t.TYPE_CHECKING:
    from tidns.simnet import CampaignResult
    from tidns.simnet import SimEvent


LOG = logging.getLogger(__name__)


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "campaign",
        description=(
            "Run one TI-DNS attack campaign on the simulated network and "
            "keep its trace and final ledger"
        ),
    )

    subparser.add_argument(
        "-c",
        "--config",
        type=pathlib.Path,
        default=None,
        help="TOML experiment configuration",
    )
    subparser.add_argument(
        "-s", "--seed", type=int, default=None, help="Random seed"
    )
    subparser.add_argument(
        "-n", "--attempts", type=int, default=None, help="Attack attempts"
    )
    subparser.add_argument(
        "-t",
        "--topology",
        type=pathlib.Path,
        default=None,
        help="Topology file (TOML or JSON) with resolvers, victims and zone",
    )
    subparser.add_argument(
        "--trace",
        type=pathlib.Path,
        default=None,
        help="Write the event trace here as JSON lines, .zst compresses",
    )
    subparser.add_argument(
        "--snapshot",
        type=pathlib.Path,
        default=None,
        help="Archive the final ledger here",
    )
    subparser.add_argument(
        "--until",
        type=float,
        default=None,
        metavar="MS",
        help="Only run the event loop up to this simulated time",
    )
    subparser.set_defaults(func=main)


def main(options: argparse.Namespace) -> None:
    config = ExperimentConfig()
    if options.config is not None:
        config = ExperimentConfig.load(options.config)
    config = config.with_overrides(
        seed=options.seed, attempts=options.attempts
    )

    topology = None
    if options.topology is not None:
        try:
            topology = Topology.load(options.topology)
        except OSError as exc:
            raise exceptions.InvalidConfigError(
                "topology", f"cannot read {options.topology}: {exc}"
            ) from exc
        LOG.info(
            "Loaded topology of %d resolvers, %d attacked",
            len(topology.resolvers),
            len(topology.victims),
        )

    if options.until is not None:
        if options.snapshot is not None:
            raise exceptions.InvalidConfigError(
                "campaign", "--snapshot needs a complete campaign"
            )

        trace = run_event_loop(
            topology or Topology.create(config.sim),
            config.sim,
            options.until,
            config.incentive,
        )
        write_trace(options.trace, trace)
        with printlib.section("Event loop"):
            printlib.table(
                {"Until": f"{options.until:.0f} ms", "Events": len(trace)}
            )
        return

    with resources.measure("campaign"):
        result = run_campaign(
            config.sim,
            config.incentive,
            topology=topology,
            block_size=config.pipeline.block_size,
            block_interval_ms=config.pipeline.block_interval_ms,
            record_trace=options.trace is not None,
            stake_samples=config.experiment.stake_samples,
        )

    write_trace(options.trace, result.trace)
    if options.snapshot is not None:
        write_snapshot(options.snapshot, result)

    print_summary(result)


def write_trace(
    path: pathlib.Path | None, trace: t.Sequence[SimEvent]
) -> None:
    if path is None:
        return

    export_trace(trace, path)
    LOG.info("Trace of %d events is written to %s", len(trace), path)


def write_snapshot(path: pathlib.Path, result: CampaignResult) -> None:
    if result.ledger is None:
        raise RuntimeError("Campaign result carries no ledger")

    with path.open("wb") as fp:
        save_ledger_to(fp, result.ledger)

    with path.open("rb") as fp:
        _, metadata = sniff(fp, validate=True)

    LOG.info(
        "Ledger at height %d is archived to %s",
        metadata["height"],
        path,
        extra={"fields": {"state_root": metadata["state_root"]}},
    )


def print_summary(result: CampaignResult) -> None:
    rows: dict[str, t.Any] = {
        "Attempts": result.attempts,
        "Accepted forgeries": result.successes,
        "Rate": result.rate,
        "Poisoned lookups": result.poisonings,
        "Served forgeries": sum(
            outcome.client_served_forgery for outcome in result.outcomes
        ),
    }
    if result.stake_samples:
        first, last = result.stake_samples[0], result.stake_samples[-1]
        rows["Victim share"] = (
            f"{first.victim_share:.4f} -> {last.victim_share:.4f}"
        )
    rows["State root"] = result.state_root

    with printlib.section(f"Campaign, seed {result.params.seed}"):
        printlib.table(rows)
