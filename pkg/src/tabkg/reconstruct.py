"""Merge detected cell regions with recognised text lines."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ZeroAreaLine
from .geometry import overlap_ratio
from .pagexml import CellRegion, PageDocument, TextLine
from .table import LogicalTable, TableCell

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.2
# centroids closer than this (pixels) count as tied for reading order
CENTROID_TIE = 1.0


def assign_lines(
    cells: Sequence[CellRegion],
    lines: Sequence[TextLine],
    threshold: float = DEFAULT_THRESHOLD,
    relative_to: str = "line",
) -> dict[str, str]:
    """Map each line id to the cell holding the largest share of it.

    A cell qualifies when its overlap ratio reaches ``threshold``; ties go to
    the lexicographically smaller cell id.  Lines that qualify nowhere (or
    have a zero-area outline) are left out of the result and logged.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    assignment: dict[str, str] = {}
    for line in lines:
        best_id, best_ratio = None, -1.0
        try:
            for cell in cells:
                ratio = overlap_ratio(line.outline, cell.outline, relative_to)
                if ratio < threshold:
                    continue
                if ratio > best_ratio or (ratio == best_ratio and cell.id < best_id):
                    best_id, best_ratio = cell.id, ratio
        except ZeroAreaLine:
            log.warning("line %s has a zero-area outline; left unassigned", line.id)
            continue
        if best_id is not None:
            assignment[line.id] = best_id
    missing = [ln.id for ln in lines if ln.id not in assignment]
    if missing:
        log.warning("%d line(s) unassigned at threshold %.3g: %s",
                    len(missing), threshold, ", ".join(missing))
    return assignment


def unassigned_lines(lines: Sequence[TextLine], assignment: Mapping[str, str]) -> list[str]:
    return [ln.id for ln in lines if ln.id not in assignment]


def _reading_order(a: TextLine, b: TextLine) -> int:
    ca, cb = a.outline.centroid(), b.outline.centroid()
    if abs(ca.y - cb.y) > CENTROID_TIE:
        return -1 if ca.y < cb.y else 1
    if abs(ca.x - cb.x) > CENTROID_TIE:
        return -1 if ca.x < cb.x else 1
    if a.baseline and b.baseline:
        ka = (a.baseline[0].y, a.baseline[0].x)
        kb = (b.baseline[0].y, b.baseline[0].x)
        if ka != kb:
            return -1 if ka < kb else 1
    return (a.id > b.id) - (a.id < b.id)


def _resolve_spans(cells: Sequence[CellRegion]) -> dict[str, tuple[int, int]]:
    """Shrink spans so that no two cells cover the same grid slot.

    Every anchor is reserved first; spans then grow column-wise, then
    row-wise, only into free slots.
    """
    taken = {(c.row_index, c.col_index) for c in cells}
    spans = {}
    for c in cells:
        r0, c0 = c.row_index, c.col_index
        cs = 1
        while cs < c.col_span and (r0, c0 + cs) not in taken:
            cs += 1
        rs = 1
        while rs < c.row_span and all((r0 + rs, c0 + k) not in taken for k in range(cs)):
            rs += 1
        for dr in range(rs):
            for dc in range(cs):
                taken.add((r0 + dr, c0 + dc))
        if (rs, cs) != (c.row_span, c.col_span):
            log.warning("cell %s: span %dx%d reduced to %dx%d to avoid overlap",
                        c.id, c.row_span, c.col_span, rs, cs)
        spans[c.id] = (rs, cs)
    return spans


@dataclass(frozen=True)
class Reconstruction:
    page: PageDocument
    table: LogicalTable
    unassigned: tuple[str, ...]


def build_table(doc: PageDocument, assignment: Mapping[str, str]) -> tuple[PageDocument, LogicalTable]:
    """Fill cells with their assigned lines and derive the logical grid."""
    lines_by_id = {ln.id: ln for ln in doc.lines}
    per_cell: dict[str, list[TextLine]] = {}
    for line_id, cell_id in assignment.items():
        per_cell.setdefault(cell_id, []).append(lines_by_id[line_id])
    order = functools.cmp_to_key(_reading_order)
    cell_text = {}
    for cell_id, members in per_cell.items():
        members.sort(key=order)
        cell_text[cell_id] = tuple(ln.id for ln in members)

    spans = _resolve_spans(doc.cells)
    cells = []
    for c in doc.cells:
        text = "\n".join(lines_by_id[lid].text.strip() for lid in cell_text.get(c.id, ()))
        rs, cs = spans[c.id]
        cells.append(TableCell(c.row_index, c.col_index, rs, cs, text, c.id))
    return doc.with_cell_text(cell_text), LogicalTable.from_cells(cells)


def reconstruct(doc: PageDocument, threshold: float = DEFAULT_THRESHOLD,
                relative_to: str = "line") -> Reconstruction:
    assignment = assign_lines(doc.cells, doc.lines, threshold, relative_to)
    page, table = build_table(doc, assignment)
    return Reconstruction(page, table, tuple(unassigned_lines(doc.lines, assignment)))
