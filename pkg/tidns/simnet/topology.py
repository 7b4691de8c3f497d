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
from tidns.simnet.authoritative import Zone


if t.TYPE_CHECKING:
    import os

    import typing_extensions as te

    from tidns import types as tt
    from tidns.simnet.params import SimParams


@dataclasses.dataclass(frozen=True, kw_only=True)
class Topology:
    resolvers: tuple[tt.ResolverID, ...]
    victims: tuple[tt.ResolverID, ...]
    zone: Zone
    target: Query

    def __post_init__(self) -> None:
        if len(set(self.resolvers)) != len(self.resolvers):
            raise exceptions.InvalidConfigError(
                "topology", "resolver names are not unique"
            )
        if not set(self.victims) <= set(self.resolvers):
            raise exceptions.InvalidConfigError(
                "topology", "victims must be resolvers"
            )
        if self.target not in self.zone:
            raise exceptions.InvalidConfigError(
                "topology", f"zone has no record for {self.target}"
            )

    @property
    def clean(self) -> tuple[tt.ResolverID, ...]:
        victims = set(self.victims)
        return tuple(rid for rid in self.resolvers if rid not in victims)

    @property
    def genesis_creator(self) -> tt.ResolverID:
        return (self.clean or self.resolvers)[-1]

    @classmethod
    def create(cls, params: SimParams, zone: Zone | None = None) -> te.Self:
        target = Query(params.target_name, QType.A)
        if zone is None:
            zone = Zone(
                {
                    target: RecordSet.create(
                        target, [params.target_address], params.zone_ttl
                    )
                }
            )

        return cls(
            resolvers=tuple(params.resolver_ids()),
            victims=tuple(params.victim_ids()),
            zone=zone,
            target=target,
        )

    @classmethod
    def from_document(cls, doc: t.Mapping[str, t.Any]) -> te.Self:
        try:
            resolvers = tuple(doc["resolvers"])
            target = Query(doc["target"], QType.parse(doc.get("qtype", "A")))
        except KeyError as exc:
            raise exceptions.InvalidConfigError(
                "topology", f"missing {exc}"
            ) from exc

        return cls(
            resolvers=resolvers,
            victims=tuple(doc.get("victims", ())),
            zone=Zone.from_document(doc.get("zone", {})),
            target=target,
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

    def apply_to(self, params: SimParams) -> SimParams:
        return params.replace(
            resolvers=len(self.resolvers),
            attacked=len(self.victims),
            target_name=self.target.qname.rstrip("."),
        )
