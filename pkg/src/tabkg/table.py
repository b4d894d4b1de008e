"""Logical tables: grid cells with spans, plus HTML, tree and row-text views.

Cell text uses ``\\n`` between physical lines.  In HTML a line break is
written as ``<br>``; raw whitespace runs containing a line break or tab are
formatting and collapse to one space when read back, and each line is
trimmed.  Text that is already in that canonical form survives
``from_html(to_html(t))`` unchanged.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import NamedTuple, Optional

from .errors import NoTable, OverlappingCells, RowOutOfRange, TableError

ROW_SEPARATOR = " "


@dataclass(frozen=True)
class TableCell:
    row: int
    col: int
    row_span: int = 1
    col_span: int = 1
    text: str = ""
    source_cell_id: Optional[str] = None

    def __post_init__(self):
        if self.row < 0 or self.col < 0:
            raise TableError(f"negative cell index ({self.row}, {self.col})")
        if self.row_span < 1 or self.col_span < 1:
            raise TableError(f"cell ({self.row}, {self.col}) has span < 1")

    @property
    def cell_id(self) -> str:
        """PageXML id when known, else a positional id."""
        if self.source_cell_id:
            return self.source_cell_id
        return f"cell_{self.row}_{self.col}"

    def slots(self):
        for r in range(self.row, self.row + self.row_span):
            for c in range(self.col, self.col + self.col_span):
                yield r, c


@dataclass(frozen=True)
class LogicalTable:
    n_rows: int = 0
    n_cols: int = 0
    cells: tuple[TableCell, ...] = ()

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: (c.row, c.col)))
        object.__setattr__(self, "cells", cells)
        if self.n_rows < 0 or self.n_cols < 0:
            raise TableError("negative table size")
        taken: dict[tuple[int, int], TableCell] = {}
        for cell in cells:
            if cell.row + cell.row_span > self.n_rows or cell.col + cell.col_span > self.n_cols:
                raise TableError(
                    f"cell ({cell.row}, {cell.col}) does not fit a "
                    f"{self.n_rows}x{self.n_cols} grid"
                )
            for slot in cell.slots():
                if slot in taken:
                    other = taken[slot]
                    raise OverlappingCells(
                        f"cells at ({other.row}, {other.col}) and ({cell.row}, {cell.col}) "
                        f"both cover slot {slot}"
                    )
                taken[slot] = cell

    @classmethod
    def from_cells(cls, cells) -> "LogicalTable":
        """Size the grid to the cells' maximal extents."""
        cells = tuple(cells)
        n_rows = max((c.row + c.row_span for c in cells), default=0)
        n_cols = max((c.col + c.col_span for c in cells), default=0)
        return cls(n_rows, n_cols, cells)

    def row_cells(self, row: int) -> list[TableCell]:
        """Cells anchored in ``row``, left to right."""
        return [c for c in self.cells if c.row == row]

    def cell_at(self, row: int, col: int) -> Optional[TableCell]:
        for c in self.cells:
            if c.row <= row < c.row + c.row_span and c.col <= col < c.col + c.col_span:
                return c
        return None


# -- HTML ----------------------------------------------------------------------

def _escape(text: str) -> str:
    return "<br>".join(html.escape(part, quote=False) for part in text.split("\n"))


def to_html(t: LogicalTable) -> str:
    """Render ``t`` as a compact HTML table.

    ``colspan``/``rowspan`` appear only when > 1.  Cells that the usual
    left-to-right placement would put elsewhere (sparse grids) carry a
    ``data-col`` attribute, and a ``data-cols`` attribute on ``<table>``
    records trailing empty columns, so the grid survives a round trip.
    """
    parts = []
    extent = max((c.col + c.col_span for c in t.cells), default=0)
    parts.append(f'<table data-cols="{t.n_cols}">' if t.n_cols > extent else "<table>")
    occupied: set[tuple[int, int]] = set()
    for r in range(t.n_rows):
        parts.append("<tr>")
        cursor = 0
        for cell in t.row_cells(r):
            while (r, cursor) in occupied:
                cursor += 1
            attrs = []
            if cell.source_cell_id:
                attrs.append(f'id="{html.escape(cell.source_cell_id)}"')
            if cell.col_span > 1:
                attrs.append(f'colspan="{cell.col_span}"')
            if cell.row_span > 1:
                attrs.append(f'rowspan="{cell.row_span}"')
            if cell.col != cursor:
                attrs.append(f'data-col="{cell.col}"')
            open_tag = "<td " + " ".join(attrs) + ">" if attrs else "<td>"
            parts.append(f"{open_tag}{_escape(cell.text)}</td>")
            occupied.update(cell.slots())
            cursor = cell.col + cell.col_span
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


_FORMATTING_WS = re.compile(r"[ \t\r\n\f]*[\t\r\n\f][ \t\r\n\f]*")


def _clean_cell_text(raw: str) -> str:
    text = _FORMATTING_WS.sub(" ", raw)
    return "\n".join(line.strip(" ") for line in text.split("\x00"))


class _TableHTMLParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.tables = 0
        self.depth = 0
        self.declared_cols: Optional[int] = None
        self.rows: list[list[dict]] = []
        self.cell: Optional[dict] = None

    def handle_starttag(self, tag, attrs):
        a = dict(attrs)
        if tag == "table":
            self.tables += 1
            self.depth += 1
            if self.tables == 1 and a.get("data-cols"):
                self.declared_cols = int(a["data-cols"])
            return
        if self.depth != 1 or self.tables != 1:
            return
        if tag == "tr":
            self._close_cell()
            self.rows.append([])
        elif tag in ("td", "th"):
            self._close_cell()
            if not self.rows:
                self.rows.append([])
            self.cell = {"attrs": a, "buf": []}
            self.rows[-1].append(self.cell)
        elif tag == "br" and self.cell is not None:
            self.cell["buf"].append("\x00")

    handle_startendtag = handle_starttag

    def handle_endtag(self, tag):
        if tag == "table":
            self._close_cell()
            self.depth -= 1
        elif tag in ("td", "th", "tr"):
            self._close_cell()

    def handle_data(self, data):
        if self.cell is not None and self.depth == 1:
            self.cell["buf"].append(data)

    def _close_cell(self):
        self.cell = None


def _span(attrs, name) -> int:
    raw = attrs.get(name)
    if raw is None or str(raw).strip() == "":
        return 1
    try:
        return max(1, int(str(raw).strip()))
    except ValueError as exc:
        raise TableError(f"bad {name} value {raw!r}") from exc


def from_html(h: str) -> LogicalTable:
    """Parse the single table in ``h`` into a LogicalTable.

    Grid positions are recovered with the standard occupancy scan: each cell
    goes to the first free column of its row (or to ``data-col`` if given).
    """
    parser = _TableHTMLParser()
    parser.feed(h)
    parser.close()
    if parser.tables == 0:
        raise NoTable("no <table> element found")
    if parser.tables > 1:
        raise TableError(f"expected exactly one table, found {parser.tables}")

    occupied: set[tuple[int, int]] = set()
    cells: list[TableCell] = []
    for r, row in enumerate(parser.rows):
        cursor = 0
        for raw in row:
            attrs = raw["attrs"]
            cs, rs = _span(attrs, "colspan"), _span(attrs, "rowspan")
            if attrs.get("data-col") is not None:
                col = int(attrs["data-col"])
            else:
                while (r, cursor) in occupied:
                    cursor += 1
                col = cursor
            cell = TableCell(r, col, rs, cs, _clean_cell_text("".join(raw["buf"])), attrs.get("id") or None)
            for slot in cell.slots():
                if slot in occupied:
                    raise OverlappingCells(f"cell at ({r}, {col}) overlaps slot {slot}")
                occupied.add(slot)
            cells.append(cell)
            cursor = col + cs
    n_rows = max([len(parser.rows)] + [c.row + c.row_span for c in cells])
    n_cols = max((c.col + c.col_span for c in cells), default=0)
    if parser.declared_cols is not None:
        n_cols = max(n_cols, parser.declared_cols)
    return LogicalTable(n_rows, n_cols, tuple(cells))


# -- tree view -----------------------------------------------------------------

@dataclass
class TreeNode:
    tag: str
    col_span: int = 1
    row_span: int = 1
    text: str = ""
    children: list["TreeNode"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(ch.size() for ch in self.children)


TableTree = TreeNode


def to_tree(t: LogicalTable) -> TreeNode:
    root = TreeNode("table")
    for r in range(t.n_rows):
        tr = TreeNode("tr")
        for cell in t.row_cells(r):
            tr.children.append(TreeNode("td", cell.col_span, cell.row_span, cell.text))
        root.children.append(tr)
    return root


# -- row text ------------------------------------------------------------------

class Segment(NamedTuple):
    cell_id: str
    start: int
    end: int
    col: int = 0
    col_span: int = 1


@dataclass(frozen=True)
class RowText:
    row: int
    text: str
    segments: tuple[Segment, ...]

    def segment_for_column(self, col: int) -> Optional[Segment]:
        for seg in self.segments:
            if seg.col <= col < seg.col + seg.col_span:
                return seg
        return None

    def segment_containing(self, start: int, end: int) -> Optional[Segment]:
        """First segment that fully covers the character range [start, end)."""
        for seg in self.segments:
            if seg.start <= start and end <= seg.end:
                return seg
        return None


def row_text(t: LogicalTable, row: int) -> RowText:
    if not 0 <= row < t.n_rows:
        raise RowOutOfRange(f"row {row} outside 0..{t.n_rows - 1}")
    pieces = []
    segments = []
    pos = 0
    for i, cell in enumerate(t.row_cells(row)):
        if i:
            pieces.append(ROW_SEPARATOR)
            pos += len(ROW_SEPARATOR)
        segments.append(Segment(cell.cell_id, pos, pos + len(cell.text), cell.col, cell.col_span))
        pieces.append(cell.text)
        pos += len(cell.text)
    return RowText(row, "".join(pieces), tuple(segments))
