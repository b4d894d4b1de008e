"""A small SHACL engine for provenance graphs.

Supported: node shapes with ``sh:targetClass`` and ``sh:property`` shapes
using ``sh:path`` (a single predicate), ``sh:minCount``, ``sh:maxCount``,
``sh:datatype``, ``sh:nodeKind`` and ``sh:class``.  Any other constraint
component is rejected at load time.  Validation treats all named graphs as
one union graph and does no RDFS inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import rdflib
from rdflib.namespace import RDF as RDFNS, SH as SHNS

from .errors import MalformedShapes, UnsupportedConstraint
from .kg.config import NamespaceConfig
from .kg.terms import IRI, RDF_TYPE, BNode, Literal, Quad

NODE_KINDS = ("IRI", "Literal", "BlankNode")

# non-validating SHACL properties that may appear on shapes
_ANNOTATIONS = {"name", "description", "message", "order", "group", "severity", "defaultValue"}
_NODE_SHAPE_KEYS = {"targetClass", "property"} | _ANNOTATIONS
_PROPERTY_KEYS = {"path", "minCount", "maxCount", "datatype", "nodeKind", "class"} | _ANNOTATIONS


@dataclass(frozen=True)
class PropertyConstraint:
    path: IRI
    min_count: Optional[int] = None
    max_count: Optional[int] = None
    datatype: Optional[IRI] = None
    node_kind: Optional[str] = None
    class_: Optional[IRI] = None

    def __post_init__(self):
        if self.min_count is not None and self.min_count < 0:
            raise MalformedShapes(f"{self.path}: negative minCount")
        if self.min_count is not None and self.max_count is not None and self.min_count > self.max_count:
            raise MalformedShapes(f"{self.path}: minCount > maxCount")
        if self.node_kind is not None and self.node_kind not in NODE_KINDS:
            raise UnsupportedConstraint(f"sh:nodeKind sh:{self.node_kind}")


@dataclass(frozen=True)
class ShapeSpec:
    iri: str
    target_class: IRI
    constraints: tuple[PropertyConstraint, ...]

    def __post_init__(self):
        if not self.constraints:
            raise MalformedShapes(f"shape {self.iri} has no property constraints")


@dataclass(frozen=True)
class Violation:
    focus: str
    shape: str
    constraint: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def conforms(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = [f"conforms: {str(self.conforms).lower()}", f"violations: {len(self.violations)}"]
        for v in self.violations:
            lines.append(f"- focus {v.focus} | shape {v.shape} | {v.constraint} | {v.message}")
        return "\n".join(lines) + "\n"


# -- loading -------------------------------------------------------------------

def _sh_local(term) -> Optional[str]:
    s = str(term)
    return s[len(str(SHNS)):] if s.startswith(str(SHNS)) else None


def _node_name(node) -> str:
    return str(node) if isinstance(node, rdflib.URIRef) else f"_:{node}"


def _single(g: rdflib.Graph, node, pred, shape: str):
    values = list(g.objects(node, pred))
    if len(values) > 1:
        raise MalformedShapes(f"{shape}: more than one {pred.n3()}")
    return values[0] if values else None


def _int(value, what: str, shape: str) -> Optional[int]:
    if value is None:
        return None
    try:
        return int(value.toPython())
    except (TypeError, ValueError, AttributeError) as exc:
        raise MalformedShapes(f"{shape}: {what} must be an integer") from exc


def _iri(value, what: str, shape: str) -> Optional[IRI]:
    if value is None:
        return None
    if not isinstance(value, rdflib.URIRef):
        raise UnsupportedConstraint(f"{what} with non-IRI value", shape)
    return IRI(str(value))


def _check_keys(g: rdflib.Graph, node, allowed: set[str], shape: str):
    for pred in set(g.predicates(node, None)):
        local = _sh_local(pred)
        if local is not None and local not in allowed:
            raise UnsupportedConstraint(f"sh:{local}", shape)


def _property_constraint(g: rdflib.Graph, node, shape: str) -> PropertyConstraint:
    _check_keys(g, node, _PROPERTY_KEYS, shape)
    path = _single(g, node, SHNS.path, shape)
    if path is None:
        raise MalformedShapes(f"{shape}: property shape without sh:path")
    if not isinstance(path, rdflib.URIRef):
        raise UnsupportedConstraint("complex sh:path", shape)
    kind = _single(g, node, SHNS.nodeKind, shape)
    kind_local = _sh_local(kind) if kind is not None else None
    if kind is not None and kind_local not in NODE_KINDS:
        raise UnsupportedConstraint(f"sh:nodeKind {kind.n3()}", shape)
    return PropertyConstraint(
        IRI(str(path)),
        _int(_single(g, node, SHNS.minCount, shape), "sh:minCount", shape),
        _int(_single(g, node, SHNS.maxCount, shape), "sh:maxCount", shape),
        _iri(_single(g, node, SHNS.datatype, shape), "sh:datatype", shape),
        kind_local,
        _iri(_single(g, node, SHNS["class"], shape), "sh:class", shape),
    )


def load_shapes(document: bytes | str) -> list[ShapeSpec]:
    """Parse a Turtle shapes document into ShapeSpecs (one per target class)."""
    g = rdflib.Graph()
    try:
        g.parse(data=document, format="turtle")
    except Exception as exc:  # rdflib raises a variety of parser errors
        raise MalformedShapes(f"cannot parse shapes: {exc}") from exc
    shapes_nodes = set(g.subjects(RDFNS.type, SHNS.NodeShape)) | set(g.subjects(SHNS.targetClass, None))
    for s in g.subjects(RDFNS.type, SHNS.PropertyShape):
        if (None, SHNS.property, s) not in g:
            raise UnsupportedConstraint("standalone sh:PropertyShape", _node_name(s))
    out = []
    for node in sorted(shapes_nodes, key=_node_name):
        name = _node_name(node)
        _check_keys(g, node, _NODE_SHAPE_KEYS, name)
        targets = sorted(g.objects(node, SHNS.targetClass), key=str)
        if not targets:
            raise UnsupportedConstraint("node shape without sh:targetClass", name)
        constraints = tuple(sorted(
            (_property_constraint(g, p, name) for p in g.objects(node, SHNS.property)),
            key=lambda c: (c.path.value, repr(c)),
        ))
        for t in targets:
            out.append(ShapeSpec(name, _iri(t, "sh:targetClass", name), constraints))
    return out


def load_shapes_file(path) -> list[ShapeSpec]:
    with open(path, "rb") as fh:
        return load_shapes(fh.read())


# -- validation ----------------------------------------------------------------

def _kind(term) -> str:
    if isinstance(term, IRI):
        return "IRI"
    if isinstance(term, BNode):
        return "BlankNode"
    return "Literal"


def _name(term) -> str:
    if isinstance(term, IRI):
        return term.value
    if isinstance(term, BNode):
        return f"_:{term.label}"
    return repr(term)


def validate(graph: Iterable[Quad], shapes: Sequence[ShapeSpec]) -> ValidationReport:
    index: dict = {}
    types: dict = {}
    for q in graph:
        index.setdefault(q.subject, {}).setdefault(q.predicate, set()).add(q.object)
        if q.predicate == RDF_TYPE:
            types.setdefault(q.subject, set()).add(q.object)
    report = ValidationReport()
    for shape in shapes:
        focus_nodes = sorted((s for s, ts in types.items() if shape.target_class in ts), key=_name)
        for focus in focus_nodes:
            props = index.get(focus, {})
            for c in shape.constraints:
                values = props.get(c.path, set())
                report.violations.extend(_check(focus, shape, c, values, types))
    return report


def _check(focus, shape: ShapeSpec, c: PropertyConstraint, values: set, types: dict):
    def v(constraint, message):
        return Violation(_name(focus), shape.iri, f"{constraint} on {c.path.value}", message)

    n = len(values)
    if c.min_count is not None and n < c.min_count:
        yield v("sh:minCount", f"{n} value(s), at least {c.min_count} required")
    if c.max_count is not None and n > c.max_count:
        yield v("sh:maxCount", f"{n} value(s), at most {c.max_count} allowed")
    for value in sorted(values, key=_name):
        if c.datatype is not None:
            if not isinstance(value, Literal) or value.datatype != c.datatype.value:
                yield v("sh:datatype", f"{_name(value)} is not a {c.datatype.value} literal")
        if c.node_kind is not None and _kind(value) != c.node_kind:
            yield v("sh:nodeKind", f"{_name(value)} is not a {c.node_kind}")
        if c.class_ is not None and c.class_ not in types.get(value, set()):
            yield v("sh:class", f"{_name(value)} is not an instance of {c.class_.value}")


# -- shipped shapes ------------------------------------------------------------

def provenance_shapes_turtle(ns: NamespaceConfig = NamespaceConfig()) -> str:
    """Shapes that every provenance graph built with ``ns`` must satisfy."""
    p = ns.vocab_prefix

    def prop(path, dt=None, kind=None, count=True):
        parts = [f"sh:path {path}"]
        if count:
            parts += ["sh:minCount 1", "sh:maxCount 1"]
        else:
            parts += ["sh:minCount 1"]
        if dt:
            parts.append(f"sh:datatype {dt}")
        if kind:
            parts.append(f"sh:nodeKind sh:{kind}")
        return "    sh:property [ " + " ; ".join(parts) + " ]"

    derived = prop("prov:wasDerivedFrom", kind="IRI", count=False)
    row = prop(f"{p}:rowIndex", dt="xsd:integer")
    blocks = {
        "RowProvenance": [derived, row],
        "CellProvenance": [derived, row, prop(f"{p}:cellId", dt="xsd:string"),
                           prop(f"{p}:coordinates", dt="xsd:string")],
        "SpanProvenance": [derived, row, prop(f"{p}:startOffset", dt="xsd:integer"),
                           prop(f"{p}:endOffset", dt="xsd:integer")],
    }
    out = [
        "@prefix sh: <http://www.w3.org/ns/shacl#> .",
        "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .",
        "@prefix prov: <http://www.w3.org/ns/prov#> .",
        f"@prefix {p}: <{ns.vocab}> .",
        "",
    ]
    for cls, props in blocks.items():
        out.append(f"{p}:{cls}Shape a sh:NodeShape ;")
        out.append(f"    sh:targetClass {p}:{cls} ;")
        out.append(" ;\n".join(props) + " .")
        out.append("")
    return "\n".join(out)

