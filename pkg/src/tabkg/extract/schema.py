"""Extraction schemas: entity type, properties, and rule-backend hints.

Schema files are YAML::

    entity_type: Person
    placeholders: [not mentioned, unknown, n/a]   # optional
    properties:
      - name: name
        column: 0                 # 0-based column binding
      - name: birth_date
        datatype: date
        pattern: '\\d{2}-\\d{2}-\\d{4}'
      - name: birth_place
        kind: named-entity
        attributes:
          - name: name
            column: 2
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import yaml

from ..errors import InvalidPattern, SchemaError

KINDS = ("literal", "named-entity")
DATATYPES = ("string", "date", "integer")
DEFAULT_PLACEHOLDERS = ("not mentioned", "unknown", "n/a")


@dataclass(frozen=True)
class PropertySpec:
    name: str
    kind: str = "literal"
    datatype: str = "string"
    column: Optional[int] = None
    pattern: Optional[re.Pattern] = None
    attributes: tuple["PropertySpec", ...] = ()
    description: str = ""

    @property
    def has_hint(self) -> bool:
        return self.column is not None or self.pattern is not None


@dataclass(frozen=True)
class ExtractionSchema:
    entity_type: str
    properties: tuple[PropertySpec, ...]
    placeholders: tuple[str, ...] = DEFAULT_PLACEHOLDERS
    namespace: Optional[str] = None
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        names = [p.name for p in self.properties]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"duplicate property names: {sorted(dupes)}")
        for p in self.properties:
            if p.attributes and p.kind != "named-entity":
                raise SchemaError(f"property {p.name!r}: attributes need kind named-entity")
            anames = [a.name for a in p.attributes]
            if len(set(anames)) != len(anames):
                raise SchemaError(f"property {p.name!r}: duplicate attribute names")
        object.__setattr__(self, "_index", {p.name: p for p in self.properties})

    def property(self, name: str) -> Optional[PropertySpec]:
        return self._index.get(name)

    def resolve(self, path: str) -> Optional[PropertySpec]:
        """Spec for ``prop`` (literal) or ``prop.attr`` (named-entity attribute)."""
        head, _, attr = path.partition(".")
        spec = self._index.get(head)
        if spec is None:
            return None
        if not attr:
            return spec if spec.kind == "literal" else None
        if spec.kind != "named-entity":
            return None
        for a in spec.attributes:
            if a.name == attr:
                return a
        return None

    def order(self, path: str) -> tuple[int, int]:
        head, _, attr = path.partition(".")
        i = self.properties.index(self._index[head])
        j = 0
        if attr:
            j = [a.name for a in self._index[head].attributes].index(attr)
        return i, j

    def descriptor(self) -> dict:
        """JSON-friendly description sent to remote backends."""
        def prop(p: PropertySpec) -> dict:
            d = {"name": p.name, "kind": p.kind, "datatype": p.datatype}
            if p.description:
                d["description"] = p.description
            if p.attributes:
                d["attributes"] = [prop(a) for a in p.attributes]
            return d

        return {"entity_type": self.entity_type, "properties": [prop(p) for p in self.properties]}


def _compile(pattern: str, where: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise InvalidPattern(f"{where}: {exc}") from exc


def _property(raw: dict, where: str, nested: bool = False) -> PropertySpec:
    if not isinstance(raw, dict) or "name" not in raw:
        raise SchemaError(f"{where}: each property needs a name")
    name = str(raw["name"])
    if not name or "." in name:
        raise SchemaError(f"{where}: invalid property name {name!r}")
    kind = raw.get("kind", "literal")
    if kind not in KINDS or (nested and kind != "literal"):
        raise SchemaError(f"{where}.{name}: unsupported kind {kind!r}")
    datatype = raw.get("datatype", "string")
    if datatype not in DATATYPES:
        raise SchemaError(f"{where}.{name}: unsupported datatype {datatype!r}")
    column = raw.get("column")
    if column is not None and (not isinstance(column, int) or column < 0):
        raise SchemaError(f"{where}.{name}: column must be a non-negative integer")
    pattern = _compile(raw["pattern"], f"{where}.{name}") if raw.get("pattern") else None
    attrs = tuple(_property(a, f"{where}.{name}", nested=True) for a in raw.get("attributes", []) or [])
    if attrs and kind != "named-entity":
        raise SchemaError(f"{where}.{name}: attributes need kind named-entity")
    return PropertySpec(name, kind, datatype, column, pattern, attrs, str(raw.get("description", "")))


def schema_from_dict(raw: dict) -> ExtractionSchema:
    if not isinstance(raw, dict) or "entity_type" not in raw:
        raise SchemaError("schema needs an entity_type")
    props = tuple(_property(p, "properties") for p in raw.get("properties", []) or [])
    placeholders = tuple(str(p) for p in raw.get("placeholders", DEFAULT_PLACEHOLDERS))
    return ExtractionSchema(str(raw["entity_type"]), props, placeholders, raw.get("namespace"))


def load_schema(path) -> ExtractionSchema:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    return schema_from_dict(raw)
