from __future__ import annotations

import contextlib
import enum
import io
import textwrap
import typing as t


if t.TYPE_CHECKING:
    from tidns import types as tt


WIDTH = 79
INDENT = "  "


@contextlib.contextmanager
def section(title: str) -> t.Iterator[None]:
    """Print title, then whatever the block printed, indented under it."""

    body = io.StringIO()

    with contextlib.redirect_stdout(body):
        yield

    print(title)
    if text := body.getvalue().rstrip():
        print(textwrap.indent(text, INDENT))


def table(rows: t.Mapping[t.Any, t.Any], *, width: int = WIDTH) -> None:
    if not rows:
        print("-")
        return

    keys = [f"{fmt_key(key)}:" for key in rows]
    pad = max(len(key) for key in keys) + 2
    room = max(width - len(INDENT) - pad, 20)

    for key, value in zip(keys, rows.values()):
        first, *rest = textwrap.wrap(fmt_value(value), room) or ["-"]
        print(f"{key.ljust(pad)}{first}")
        for line in rest:
            print(f"{'':{pad}}{line}")


def fmt_key(key: t.Any) -> str:  # noqa: FNE008
    if isinstance(key, enum.Enum):
        return key.name.replace("_", " ").title()

    return str(key).strip()


def fmt_value(value: t.Any) -> str:  # noqa: FNE008
    match value:
        case None:
            return "-"
        case bool():
            return "yes" if value else "no"
        case enum.Enum():
            return str(value.value)
        case float():
            return f"{value:.6g}"

    return str(value).strip()


def fmt_seconds(value: tt.TimeSeconds) -> str:
    return f"{value:0.3f} s"


def fmt_megabytes(value: int) -> str:
    return f"{value / 2**20:0.1f} MB"
