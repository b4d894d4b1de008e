"""Assertion and provenance graphs from extracted entity records.

Every assertion is placed in the named graph of its row; a value with a cell
id is also placed in that cell's graph, and one with a span in that span's
graph.  The provenance graph then holds one node per named graph, named by
the graph IRI itself, describing the evidence behind it.
"""

from __future__ import annotations

import datetime as dt
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence
from urllib.parse import quote

from ..errors import SchemaViolation, UnknownCell
from ..extract.records import EntityRecord, NestedValue, PropertyValue, ValueProvenance
from ..extract.schema import ExtractionSchema, PropertySpec
from ..pagexml import PageDocument, format_points
from .config import NamespaceConfig
from .terms import IRI, RDF_TYPE, XSD_DATE, XSD_INTEGER, BNode, Literal, Quad, prov

log = logging.getLogger(__name__)

KINDS = ("row", "cell", "span")
_UNSAFE = re.compile(r"[^A-Za-z0-9._~-]")


def doc_slug(doc: str) -> str:
    """IRI-safe document name: the basename with unsafe characters replaced."""
    name = doc.replace("\\", "/").rsplit("/", 1)[-1]
    return _UNSAFE.sub("_", name) or "document"


def _segment(s: str) -> str:
    return quote(s, safe="-._~")


def mint_entity_iri(record: EntityRecord, doc: str, base: str) -> IRI:
    return IRI(f"{base}{doc_slug(doc)}/row-{record.row_index}")


def image_iri(image_ref: str, base: str) -> IRI:
    if re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*://", image_ref):
        return IRI(image_ref)
    return IRI(f"{base}images/{_segment(image_ref or 'unknown')}")


def provenance_graph_iri(doc: str, base: str) -> IRI:
    return IRI(f"{base}{doc_slug(doc)}/provenance")


@dataclass(frozen=True)
class GraphContext:
    kind: str
    document: str
    row_index: int
    base: str
    cell_id: Optional[str] = None
    span: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown context kind {self.kind!r}")
        if self.kind == "cell" and self.cell_id is None:
            raise ValueError("cell context needs a cell id")
        if self.kind == "span" and self.span is None:
            raise ValueError("span context needs a span")

    @property
    def graph_iri(self) -> IRI:
        root = f"{self.base}{doc_slug(self.document)}/prov"
        if self.kind == "row":
            return IRI(f"{root}/row/{self.row_index}")
        if self.kind == "cell":
            return IRI(f"{root}/cell/{_segment(self.cell_id)}")
        start, end = self.span
        # spans index into the row text, so the row is part of the name
        return IRI(f"{root}/row/{self.row_index}/span/{start}-{end}")


def contexts_for(p: ValueProvenance, doc: str, base: str) -> list[GraphContext]:
    out = [GraphContext("row", doc, p.row_index, base)]
    if p.cell_id is not None:
        out.append(GraphContext("cell", doc, p.row_index, base, cell_id=p.cell_id))
    if p.span is not None:
        out.append(GraphContext("span", doc, p.row_index, base, span=tuple(p.span)))
    return out


def _literal(value: str, spec: PropertySpec) -> Literal:
    if spec.datatype == "date":
        try:
            dt.date.fromisoformat(value.strip())
            return Literal(value.strip(), XSD_DATE)
        except ValueError:
            log.warning("%s: %r is not an ISO date; kept as a string", spec.name, value)
    elif spec.datatype == "integer":
        if re.fullmatch(r"[+-]?\d+", value.strip()):
            return Literal(str(int(value.strip())), XSD_INTEGER)
        log.warning("%s: %r is not an integer; kept as a string", spec.name, value)
    return Literal(value)


class _Emitter:
    def __init__(self, doc: str, ns: NamespaceConfig):
        self.doc = doc
        self.ns = ns
        self.quads: list[Quad] = []
        self.seen: set[Quad] = set()
        self.contexts: dict[IRI, GraphContext] = {}

    def emit(self, s, p, o, provenance: ValueProvenance, kinds=KINDS):
        for ctx in contexts_for(provenance, self.doc, self.ns.base):
            if ctx.kind not in kinds:
                continue
            g = ctx.graph_iri
            self.contexts.setdefault(g, ctx)
            q = Quad(s, p, o, g)
            if q not in self.seen:
                self.seen.add(q)
                self.quads.append(q)


def _bnode_label(entity: IRI, base: str, prop: str, ordinal: int) -> str:
    local = entity.value[len(base):] if entity.value.startswith(base) else entity.value
    return re.sub(r"[^A-Za-z0-9_]", "_", f"{local}_{prop}_{ordinal}")


def build_assertion_graph(
    records: Iterable[EntityRecord],
    schema: ExtractionSchema,
    doc: str,
    ns: NamespaceConfig = NamespaceConfig(),
    default_graph_copy: bool = False,
) -> tuple[list[Quad], list[GraphContext]]:
    """Quads for all records plus the distinct provenance contexts they use.

    Type quads live in the row graph only.  With ``default_graph_copy`` each
    distinct triple is also added once to the default graph.
    """
    em = _Emitter(doc, ns)
    cls = ns.term(schema.entity_type)
    for rec in records:
        if rec.entity_type != schema.entity_type:
            raise SchemaViolation(f"row {rec.row_index}: entity type {rec.entity_type!r} "
                                  f"is not {schema.entity_type!r}")
        subj = mint_entity_iri(rec, doc, ns.base)
        em.emit(subj, RDF_TYPE, cls, ValueProvenance(rec.row_index), kinds=("row",))
        ordinals: dict[str, int] = {}
        for pv in rec.values:
            spec = schema.property(pv.property)
            if spec is None:
                raise SchemaViolation(f"row {rec.row_index}: property {pv.property!r} not in schema")
            pred = ns.term(spec.name)
            if isinstance(pv.value, NestedValue):
                if spec.kind != "named-entity":
                    raise SchemaViolation(f"property {spec.name!r} is literal but holds a nested value")
                ordinals[spec.name] = ordinals.get(spec.name, 0) + 1
                node = BNode(_bnode_label(subj, ns.base, spec.name, ordinals[spec.name]))
                em.emit(subj, pred, node, pv.provenance)
                attrs = {a.name: a for a in spec.attributes}
                for attr in pv.value.attributes:
                    aspec = attrs.get(attr.property)
                    if aspec is None:
                        raise SchemaViolation(
                            f"row {rec.row_index}: attribute {spec.name}.{attr.property} not in schema")
                    em.emit(node, ns.term(aspec.name), _literal(str(attr.value), aspec), attr.provenance)
            else:
                if spec.kind != "literal":
                    raise SchemaViolation(f"property {spec.name!r} is a named entity but holds a literal")
                em.emit(subj, pred, _literal(pv.value, spec), pv.provenance)
    quads = em.quads
    if default_graph_copy:
        triples = dict.fromkeys(q.triple() for q in quads)
        quads = quads + [Quad(s, p, o) for s, p, o in triples]
    return quads, list(em.contexts.values())


def build_provenance_graph(
    contexts: Sequence[GraphContext],
    page: Optional[PageDocument],
    doc: str,
    ns: NamespaceConfig = NamespaceConfig(),
    image_ref: Optional[str] = None,
) -> list[Quad]:
    """One provenance node per context, derived from the source image."""
    graph = provenance_graph_iri(doc, ns.base)
    ref = image_ref if image_ref is not None else (page.image_ref if page else doc)
    source = image_iri(ref, ns.base)
    cells = {c.id: c for c in page.cells} if page is not None else {}
    v = ns.vocab_term
    quads = []
    for ctx in sorted({c.graph_iri: c for c in contexts}.values(), key=lambda c: c.graph_iri.value):
        node = ctx.graph_iri
        kind_class = {"row": "RowProvenance", "cell": "CellProvenance", "span": "SpanProvenance"}[ctx.kind]
        quads.append(Quad(node, RDF_TYPE, v(kind_class), graph))
        quads.append(Quad(node, RDF_TYPE, prov("Entity"), graph))
        quads.append(Quad(node, prov("wasDerivedFrom"), source, graph))
        quads.append(Quad(node, v("rowIndex"), Literal(str(ctx.row_index), XSD_INTEGER), graph))
        if ctx.kind == "cell":
            cell = cells.get(ctx.cell_id)
            if cell is None:
                raise UnknownCell(f"cell {ctx.cell_id!r} not found in page {ref!r}")
            quads.append(Quad(node, v("cellId"), Literal(cell.id), graph))
            quads.append(Quad(node, v("coordinates"), Literal(format_points(cell.outline.vertices)), graph))
        elif ctx.kind == "span":
            start, end = ctx.span
            quads.append(Quad(node, v("startOffset"), Literal(str(start), XSD_INTEGER), graph))
            quads.append(Quad(node, v("endOffset"), Literal(str(end), XSD_INTEGER), graph))
    return quads


def drop_unknown_cells(records: Iterable[EntityRecord], page: PageDocument) -> tuple[list[EntityRecord], list[str]]:
    """Replace dangling cell ids with row-level (plus span) provenance."""
    known = {c.id for c in page.cells}
    dropped: list[str] = []

    def fix(pv: PropertyValue) -> PropertyValue:
        if isinstance(pv.value, NestedValue):
            pv = PropertyValue(pv.property, NestedValue(tuple(fix(a) for a in pv.value.attributes)),
                               pv.provenance)
        p = pv.provenance
        if p.cell_id is not None and p.cell_id not in known:
            dropped.append(p.cell_id)
            return PropertyValue(pv.property, pv.value, ValueProvenance(p.row_index, None, p.span))
        return pv

    out = [EntityRecord(r.entity_type, r.row_index, tuple(fix(v) for v in r.values)) for r in records]
    return out, dropped


def closure_problems(assertions: Sequence[Quad], provenance: Sequence[Quad],
                     ns: NamespaceConfig = NamespaceConfig()) -> list[str]:
    """Named graphs used by assertions that lack exactly one typed provenance node."""
    kinds = {ns.vocab_term(k) for k in ("RowProvenance", "CellProvenance", "SpanProvenance")}
    nodes: dict[IRI, int] = {}
    for q in provenance:
        if q.predicate == RDF_TYPE and q.object in kinds:
            nodes[q.subject] = nodes.get(q.subject, 0) + 1
    problems = []
    for g in sorted({q.graph for q in assertions if q.graph is not None}):
        n = nodes.get(g, 0)
        if n != 1:
            problems.append(f"{g.value}: {n} provenance node(s)")
    return problems
