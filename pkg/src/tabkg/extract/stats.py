"""Descriptive statistics of extracted records and their provenance coverage."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .records import EntityRecord


@dataclass(frozen=True)
class ProvenanceStats:
    instances: int = 0
    properties: int = 0
    cell_provenance: int = 0

    @property
    def properties_per_instance(self) -> float:
        return self.properties / self.instances if self.instances else 0.0

    @property
    def cell_provenance_ratio(self) -> float:
        return self.cell_provenance / self.properties if self.properties else 0.0

    def __add__(self, other: "ProvenanceStats") -> "ProvenanceStats":
        return ProvenanceStats(
            self.instances + other.instances,
            self.properties + other.properties,
            self.cell_provenance + other.cell_provenance,
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d["properties_per_instance"] = self.properties_per_instance
        d["cell_provenance_ratio"] = self.cell_provenance_ratio
        return d


def provenance_stats(records: Iterable[EntityRecord]) -> ProvenanceStats:
    """Count non-empty instances, non-empty leaf values, and values carrying a cell id.

    Attributes of a named-entity value count individually.
    """
    instances = properties = cells = 0
    for rec in records:
        leaves = [pv for _, pv in rec.leaves() if pv.value.strip()]
        if not leaves:
            continue
        instances += 1
        properties += len(leaves)
        cells += sum(1 for pv in leaves if pv.provenance.cell_id is not None)
    return ProvenanceStats(instances, properties, cells)
