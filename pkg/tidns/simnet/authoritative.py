from __future__ import annotations

import dataclasses
import json
import pathlib
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]
import typing as t

from tidns import exceptions
from tidns.dnscore import Query
from tidns.dnscore import QType
from tidns.dnscore import RecordSet


if t.TYPE_CHECKING:
    import os

    import typing_extensions as te

    from tidns import types as tt
    from tidns.simnet.params import SimParams


@dataclasses.dataclass(frozen=True)
class Zone:
    records: dict[Query, RecordSet] = dataclasses.field(default_factory=dict)

    def lookup(self, query: Query) -> RecordSet:
        answer = self.records.get(query)
        if answer is None:
            return RecordSet.nxdomain(query)

        return answer

    def __contains__(self, query: object) -> bool:
        return query in self.records

    @classmethod
    def from_document(cls, doc: t.Mapping[str, t.Any]) -> te.Self:
        """Build a zone from {"ttl": 300, "records": [{name, type, data}]}."""

        default_ttl = int(doc.get("ttl", 300))
        grouped: dict[Query, list[str]] = {}
        ttls: dict[Query, int] = {}

        for item in doc.get("records", []):
            try:
                query = Query(item["name"], QType.parse(item["type"]))
                data = item["data"]
            except KeyError as exc:
                raise exceptions.InvalidConfigError(
                    "zone", f"record misses {exc}"
                ) from exc

            values = [data] if isinstance(data, str) else list(data)
            grouped.setdefault(query, []).extend(values)
            ttls[query] = int(item.get("ttl", default_ttl))

        return cls(
            {
                query: RecordSet.create(query, values, ttls[query])
                for query, values in grouped.items()
            }
        )

    @classmethod
    def load(cls, path: os.PathLike[str] | pathlib.Path) -> te.Self:
        path = pathlib.Path(path)

        with path.open("rb") as fp:
            if path.suffix == ".json":
                doc = json.load(fp)
            else:
                doc = tomllib.load(fp)

        return cls.from_document(doc)


def authoritative_respond(
    query: Query, zone: Zone, params: SimParams, now: tt.TimeMs
) -> tuple[RecordSet, tt.TimeMs]:
    """Answer from the zone and the time the answer reaches the resolver."""

    return zone.lookup(query), now + params.response_time_ms


class ZoneUpstream:
    """Synchronous upstream answering straight from a zone."""

    zone: Zone

    def __init__(self, zone: Zone) -> None:
        self.zone = zone

    def resolve(self, query: Query, now: tt.TimeMs) -> RecordSet:
        return self.zone.lookup(query)
