from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
import typing as t

from tidns import exceptions
from tidns.cli import attack
from tidns.cli import campaign
from tidns.cli import ledgerbench
from tidns.cli import perf
from tidns.cli import selftest
from tidns.cli import serve


class JSONFormatter(logging.Formatter):
    """One JSON object per record, structured extras under "fields"."""

    def format(self, record: logging.LogRecord) -> str:  # noqa: A003
        doc: dict[str, t.Any] = {
            "time": datetime.datetime.fromtimestamp(
                record.created, tz=datetime.timezone.utc
            ).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        if fields := getattr(record, "fields", None):
            doc["fields"] = fields
        if record.exc_info:
            doc["exc_info"] = self.formatException(record.exc_info)

        return json.dumps(doc, default=str)


def main() -> None:
    options = parse_options()
    configure_logging(options.debug)

    try:
        options.func(options)
    except exceptions.ConfigError as exc:
        logging.getLogger(__name__).error("Bad configuration: %s", exc)
        sys.exit(1)


def configure_logging(debug: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JSONFormatter())

    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if debug else logging.INFO)


def parse_options() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Ledger-backed verifying DNS resolvers and experiments.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )

    parser.add_argument(
        "-d",
        "--debug",
        action="store_true",
        default=False,
        help="Run in debug mode",
    )

    subparsers = parser.add_subparsers(required=True, dest="command")

    attack.register(subparsers)
    campaign.register(subparsers)
    perf.register(subparsers)
    ledgerbench.register(subparsers)
    serve.register(subparsers)
    selftest.register(subparsers)

    return parser.parse_args()
