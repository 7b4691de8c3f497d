from __future__ import annotations

import argparse
import sys
import typing as t

from tidns import oracles
from tidns.cli import printlib


def register(parser: argparse._SubParsersAction[t.Any]) -> None:
    subparser = parser.add_parser(
        "selftest",
        description="Run acceptance checks over the whole system",
    )

    subparser.add_argument(
        "--full",
        action="store_true",
        default=False,
        help="Run at acceptance scale instead of a quick smoke run",
    )
    subparser.add_argument(
        "suites",
        nargs="*",
        metavar="SUITE",
        help=f"Suites to run: {', '.join(oracles.SUITES)}",
    )
    subparser.set_defaults(func=main)


def main(options: argparse.Namespace) -> None:
    if unknown := set(options.suites) - oracles.SUITES.keys():
        sys.exit(f"Unknown suites: {', '.join(sorted(unknown))}")

    results = oracles.run_suites(options.suites or None, full=options.full)

    for result in results:
        print_result(result)
        print()

    failed = [result.name for result in results if not result.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} suites failed")
        sys.exit(2)

    print(f"All {len(results)} suites passed")


def print_result(result: oracles.SuiteResult) -> None:
    mark = "PASS" if result.passed else "FAIL"

    with printlib.section(f"{mark} {result.name}"):
        rows: dict[str, t.Any] = {"Detail": result.detail}
        if result.usage is not None:
            rows["Wall"] = printlib.fmt_seconds(result.usage.wall)
            rows["CPU"] = printlib.fmt_seconds(
                result.usage.cpu_user + result.usage.cpu_kernel
            )
            rows["RSS"] = printlib.fmt_megabytes(result.usage.rss)
        printlib.table(rows)
