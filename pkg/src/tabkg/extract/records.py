"""Entity records with value-level provenance, and their JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class ValueProvenance:
    row_index: int
    cell_id: Optional[str] = None
    span: Optional[tuple[int, int]] = None

    def level(self) -> str:
        if self.cell_id is not None:
            return "cell"
        if self.span is not None:
            return "span"
        return "row"


@dataclass(frozen=True)
class NestedValue:
    """A named-entity value: a small record of attribute values."""

    attributes: tuple["PropertyValue", ...] = ()


@dataclass(frozen=True)
class PropertyValue:
    property: str
    value: Union[str, NestedValue]
    provenance: ValueProvenance

    @property
    def is_nested(self) -> bool:
        return isinstance(self.value, NestedValue)


@dataclass(frozen=True)
class EntityRecord:
    entity_type: str
    row_index: int
    values: tuple[PropertyValue, ...] = ()

    def leaves(self) -> Iterator[tuple[str, PropertyValue]]:
        """Literal values with dotted paths (``place.name`` for nested attributes)."""
        for pv in self.values:
            if isinstance(pv.value, NestedValue):
                for attr in pv.value.attributes:
                    yield f"{pv.property}.{attr.property}", attr
            else:
                yield pv.property, pv


@dataclass
class RecordFile:
    """One document's normalized extraction output."""

    document: str
    image_ref: str = ""
    entity_type: str = ""
    records: list[EntityRecord] = field(default_factory=list)


# -- JSON ----------------------------------------------------------------------

def _prov_to_dict(p: ValueProvenance) -> dict:
    return {
        "row_index": p.row_index,
        "cell_id": p.cell_id,
        "span": list(p.span) if p.span is not None else None,
    }


def _value_to_dict(pv: PropertyValue) -> dict:
    if isinstance(pv.value, NestedValue):
        value = {"attributes": [_value_to_dict(a) for a in pv.value.attributes]}
    else:
        value = pv.value
    return {"property": pv.property, "value": value, "provenance": _prov_to_dict(pv.provenance)}


def record_to_dict(r: EntityRecord) -> dict:
    return {
        "entity_type": r.entity_type,
        "row_index": r.row_index,
        "values": [_value_to_dict(v) for v in r.values],
    }


def _prov_from_dict(d: dict) -> ValueProvenance:
    span = d.get("span")
    return ValueProvenance(
        int(d["row_index"]),
        d.get("cell_id"),
        (int(span[0]), int(span[1])) if span is not None else None,
    )


def _value_from_dict(d: dict) -> PropertyValue:
    raw = d["value"]
    if isinstance(raw, dict):
        value = NestedValue(tuple(_value_from_dict(a) for a in raw.get("attributes", [])))
    else:
        value = str(raw)
    return PropertyValue(d["property"], value, _prov_from_dict(d["provenance"]))


def record_from_dict(d: dict) -> EntityRecord:
    return EntityRecord(
        d["entity_type"],
        int(d["row_index"]),
        tuple(_value_from_dict(v) for v in d.get("values", [])),
    )


def dumps_records(rf: RecordFile) -> str:
    payload = {
        "document": rf.document,
        "image_ref": rf.image_ref,
        "entity_type": rf.entity_type,
        "records": [record_to_dict(r) for r in sorted(rf.records, key=lambda r: r.row_index)],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def loads_records(text: str) -> RecordFile:
    payload = json.loads(text)
    if isinstance(payload, list):
        # bare list of records
        return RecordFile("", records=[record_from_dict(r) for r in payload])
    if not isinstance(payload, dict) or "records" not in payload:
        raise ValueError("not a record file: no 'records' list")
    return RecordFile(
        payload.get("document", ""),
        payload.get("image_ref", ""),
        payload.get("entity_type", ""),
        [record_from_dict(r) for r in payload["records"]],
    )


def write_records(rf: RecordFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_records(rf))


def read_records(path) -> RecordFile:
    with open(path, encoding="utf-8") as fh:
        return loads_records(fh.read())
