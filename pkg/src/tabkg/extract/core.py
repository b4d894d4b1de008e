"""Row-level extraction and restoration of cell provenance from spans."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import BackendFailure
from ..table import LogicalTable, RowText, Segment, row_text
from .backends import Candidate, ExtractorBackend
from .records import EntityRecord, NestedValue, PropertyValue, ValueProvenance
from .schema import ExtractionSchema

log = logging.getLogger(__name__)


def is_placeholder(value: str, placeholders) -> bool:
    v = value.strip()
    if not v:
        return True
    folded = v.casefold()
    return any(folded == p.casefold() for p in placeholders)


def _locate(value: str, row: RowText, path: str) -> Optional[tuple[int, int]]:
    if not value:
        return None
    idx = row.text.find(value)
    if idx < 0:
        return None
    if row.text.find(value, idx + 1) >= 0:
        log.info("row %d: %r occurs more than once; using the first occurrence for %s",
                 row.row, value, path)
    return idx, idx + len(value)


def _restore(pv: PropertyValue, row: RowText, path: str) -> PropertyValue:
    if isinstance(pv.value, NestedValue):
        attrs = tuple(_restore(a, row, f"{path}.{a.property}") for a in pv.value.attributes)
        return replace(pv, value=NestedValue(attrs))
    span = pv.provenance.span
    if span is None:
        span = _locate(pv.value, row, path)
    cell_id = None
    if span is not None:
        seg = row.segment_containing(*span)
        if seg is not None:
            cell_id = seg.cell_id
    return replace(pv, provenance=ValueProvenance(pv.provenance.row_index, cell_id, span))


def restore_cell_provenance(record: EntityRecord, row: RowText) -> EntityRecord:
    """Attach cell ids to values whose span (given or found by exact search) sits in one cell.

    Values are never changed.  A value that cannot be placed inside a single
    cell keeps row-level provenance only.
    """
    if record.row_index != row.row:
        raise ValueError(f"record row {record.row_index} does not match row text {row.row}")
    return replace(record, values=tuple(_restore(v, row, v.property) for v in record.values))


@dataclass
class RowIssue:
    row: int
    message: str


@dataclass
class ExtractionRun:
    records: list[EntityRecord] = field(default_factory=list)
    failed_rows: list[RowIssue] = field(default_factory=list)
    empty_rows: list[int] = field(default_factory=list)
    warnings: list[RowIssue] = field(default_factory=list)


def _cell_mode(backend: ExtractorBackend, row: RowText, schema) -> list[Candidate]:
    out = []
    for seg in row.segments:
        sub = RowText(row.row, row.text[seg.start:seg.end],
                      (Segment(seg.cell_id, 0, seg.end - seg.start, seg.col, seg.col_span),))
        for c in backend.extract(sub, schema):
            span = (c.span[0] + seg.start, c.span[1] + seg.start) if c.span else None
            out.append(Candidate(c.property, c.value, span))
    return out


def _build_record(row: RowText, cands: list[Candidate], schema: ExtractionSchema,
                  warnings: list[RowIssue]) -> EntityRecord:
    literals: list[tuple[tuple, PropertyValue]] = []
    nested: dict[str, list[tuple[tuple, PropertyValue]]] = {}
    for i, c in enumerate(cands):
        spec = schema.resolve(c.property)
        if spec is None:
            warnings.append(RowIssue(row.row, f"discarded value for unknown property {c.property!r}"))
            log.warning("row %d: discarding value for property %r not in schema", row.row, c.property)
            continue
        if is_placeholder(c.value, schema.placeholders):
            continue
        span = c.span
        if span is not None and not (0 <= span[0] <= span[1] <= len(row.text)):
            warnings.append(RowIssue(row.row, f"{c.property}: span {span} outside row text"))
            span = None
        head, _, attr = c.property.partition(".")
        key = (*schema.order(c.property), i)
        if attr:
            pv = PropertyValue(attr, c.value, ValueProvenance(row.row, None, span))
            nested.setdefault(head, []).append((key, pv))
        else:
            pv = PropertyValue(head, c.value, ValueProvenance(row.row, None, span))
            literals.append((key, pv))
    for head, attrs in nested.items():
        attrs.sort(key=lambda kv: kv[0])
        value = NestedValue(tuple(pv for _, pv in attrs))
        literals.append(((schema.order(head)[0], -1, -1), PropertyValue(head, value, ValueProvenance(row.row))))
    literals.sort(key=lambda kv: kv[0])
    record = EntityRecord(schema.entity_type, row.row, tuple(pv for _, pv in literals))
    return restore_cell_provenance(record, row)


def run_extraction(table: LogicalTable, schema: ExtractionSchema, backend: ExtractorBackend,
                   mode: str = "row", workers: int = 1) -> ExtractionRun:
    """Extract one entity per non-empty row; see ``extract_document``."""
    if mode not in ("row", "cell"):
        raise ValueError(f"mode must be 'row' or 'cell', not {mode!r}")
    rows = [row_text(table, r) for r in range(table.n_rows)]
    run = ExtractionRun()

    def call(row: RowText):
        if not row.text.strip():
            return None
        try:
            if mode == "cell":
                return _cell_mode(backend, row, schema)
            return backend.extract(row, schema)
        except BackendFailure as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(call, rows))
    else:
        results = [call(r) for r in rows]

    for row, result in zip(rows, results):
        if result is None:
            run.empty_rows.append(row.row)
            continue
        if isinstance(result, BackendFailure):
            log.error("row %d skipped: %s", row.row, result)
            run.failed_rows.append(RowIssue(row.row, str(result)))
            continue
        record = _build_record(row, result, schema, run.warnings)
        if not record.values:
            log.info("row %d produced no values; record dropped", row.row)
            run.empty_rows.append(row.row)
            continue
        run.records.append(record)
    return run


def extract_document(table: LogicalTable, schema: ExtractionSchema, backend: ExtractorBackend,
                     mode: str = "row", workers: int = 1) -> list[EntityRecord]:
    """One EntityRecord per table row that yields at least one value.

    Backend failures skip the row (logged), empty and placeholder values are
    dropped, and every value gets cell provenance where its span allows.
    """
    return run_extraction(table, schema, backend, mode, workers).records
