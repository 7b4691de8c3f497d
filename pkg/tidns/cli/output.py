from __future__ import annotations

import argparse
import contextlib
import csv
import io
import logging
import pathlib
import sys
import typing as t

from tidns.baselines import Scheme
from tidns.config import ExperimentConfig
from tidns.config import parse_sweep


LOG = logging.getLogger(__name__)


def add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-c",
        "--config",
        type=pathlib.Path,
        default=None,
        help="TOML experiment configuration",
    )
    parser.add_argument(
        "-s", "--seed", type=int, default=None, help="Base random seed"
    )
    parser.add_argument(
        "--scheme",
        action="append",
        choices=[scheme.value for scheme in Scheme],
        default=None,
        help="Scheme to run, may be repeated",
    )
    parser.add_argument(
        "--sweep",
        action="append",
        default=None,
        metavar="PARAM=V1,V2,...",
        help="Parameter sweep, may be repeated",
    )
    parser.add_argument(
        "-n", "--attempts", type=int, default=None, help="Attack attempts"
    )
    parser.add_argument(
        "--full",
        action="store_true",
        default=False,
        help="Run full-scale campaigns",
    )
    parser.add_argument(
        "-o", "--out", default=None, help="CSV output path, - for stdout"
    )
    parser.add_argument(
        "-w",
        "--workers",
        type=int,
        default=None,
        help="Worker processes for replications",
    )


def load_config(options: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig()
    if options.config is not None:
        config = ExperimentConfig.load(options.config)

    return config.with_overrides(
        seed=options.seed,
        attempts=options.attempts,
        schemes=[Scheme(name) for name in options.scheme or ()],
        sweep=[parse_sweep(item) for item in options.sweep or ()],
        out=options.out,
        full=options.full,
        workers=options.workers,
    )


@contextlib.contextmanager
def open_output(out: str | None) -> t.Iterator[t.TextIO]:
    if out is None or out == "-":
        yield sys.stdout
        return

    with pathlib.Path(out).open("w", encoding="utf-8", newline="") as fp:
        yield fp

    LOG.info("Results are written to %s", out)


def write_csv(
    out: str | None,
    columns: t.Sequence[str],
    rows: t.Iterable[t.Mapping[str, t.Any]],
) -> None:
    with open_output(out) as fp:
        write_rows(fp, columns, rows)


def render_csv(
    columns: t.Sequence[str], rows: t.Iterable[t.Mapping[str, t.Any]]
) -> str:
    buf = io.StringIO()
    write_rows(buf, columns, rows)

    return buf.getvalue()


def write_rows(
    fp: t.TextIO,
    columns: t.Sequence[str],
    rows: t.Iterable[t.Mapping[str, t.Any]],
) -> None:
    writer = csv.DictWriter(fp, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
