"""Read and write the PageXML subset used by the pipeline.

Supported: ``Page`` attributes, ``TableRegion``/``TableCell`` (row, col,
rowSpan, colSpan, Coords) and ``TextLine`` (Coords, Baseline, TextEquiv).
Text lines are collected wherever they occur; a line nested inside a
``TableCell`` is recorded as belonging to that cell.  Other regions are
dropped and counted in ``PageDocument.dropped_regions``.
"""

from __future__ import annotations

import logging
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import DuplicateId, InvalidPage, MalformedXml, MissingCoords
from .geometry import Point, Polygon

log = logging.getLogger(__name__)

NS_2013 = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15"
NS_2019 = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15"
READ_NAMESPACES = (NS_2019, NS_2013, "")

UNASSIGNED_REGION_ID = "tabkg_unassigned_lines"
# fixed so that serialization is byte-stable
_TIMESTAMP = "1970-01-01T00:00:00"


@dataclass(frozen=True)
class CellRegion:
    id: str
    outline: Polygon
    row_index: int
    col_index: int
    row_span: int = 1
    col_span: int = 1

    def __post_init__(self):
        if self.row_span < 1 or self.col_span < 1:
            raise InvalidPage(f"cell {self.id}: spans must be >= 1")
        if self.row_index < 0 or self.col_index < 0:
            raise InvalidPage(f"cell {self.id}: negative grid index")


@dataclass(frozen=True)
class TextLine:
    id: str
    outline: Polygon
    text: str = ""
    baseline: Optional[tuple[Point, ...]] = None


@dataclass(frozen=True)
class PageDocument:
    """Parsed page.  ``cells`` are kept sorted by (row, col), ``lines`` by id."""

    image_ref: str
    image_width: int
    image_height: int
    cells: tuple[CellRegion, ...] = ()
    lines: tuple[TextLine, ...] = ()
    cell_text: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    dropped_regions: int = field(default=0, compare=False)

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: (c.row_index, c.col_index, c.id)))
        lines = tuple(sorted(self.lines, key=lambda ln: ln.id))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lines", lines)
        cell_text = {k: tuple(v) for k, v in self.cell_text.items() if v}
        object.__setattr__(self, "cell_text", cell_text)

        seen: set[str] = set()
        for obj in (*cells, *lines):
            if obj.id in seen:
                raise DuplicateId(f"duplicate id {obj.id!r}")
            seen.add(obj.id)
        positions: set[tuple[int, int]] = set()
        for c in cells:
            pos = (c.row_index, c.col_index)
            if pos in positions:
                raise InvalidPage(f"two cells share grid position {pos}")
            positions.add(pos)
        cell_ids = {c.id for c in cells}
        line_ids = {ln.id for ln in lines}
        used: set[str] = set()
        for cid, lids in cell_text.items():
            if cid not in cell_ids:
                raise InvalidPage(f"cell_text refers to unknown cell {cid!r}")
            for lid in lids:
                if lid not in line_ids:
                    raise InvalidPage(f"cell {cid!r} refers to unknown line {lid!r}")
                if lid in used:
                    raise InvalidPage(f"line {lid!r} assigned to more than one cell")
                used.add(lid)

    def cell(self, cell_id: str) -> CellRegion:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    def line(self, line_id: str) -> TextLine:
        for ln in self.lines:
            if ln.id == line_id:
                return ln
        raise KeyError(line_id)

    def with_cell_text(self, cell_text: Mapping[str, tuple[str, ...]]) -> "PageDocument":
        return PageDocument(
            self.image_ref, self.image_width, self.image_height,
            self.cells, self.lines, cell_text, self.dropped_regions,
        )


def merge_pages(cells_doc: PageDocument, lines_doc: PageDocument) -> PageDocument:
    """Combine table cells from one page with text lines from another (same image)."""
    return PageDocument(
        cells_doc.image_ref or lines_doc.image_ref,
        cells_doc.image_width or lines_doc.image_width,
        cells_doc.image_height or lines_doc.image_height,
        cells_doc.cells,
        lines_doc.lines,
        {},
        cells_doc.dropped_regions + lines_doc.dropped_regions,
    )


# -- coordinates ---------------------------------------------------------------

def format_number(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return f"{v:.2f}".rstrip("0").rstrip(".")


def format_points(points) -> str:
    return " ".join(f"{format_number(p[0])},{format_number(p[1])}" for p in points)


def parse_points(s: str) -> list[Point]:
    pts = []
    for tok in s.split():
        try:
            x, y = tok.split(",")
            pts.append(Point(float(x), float(y)))
        except ValueError as exc:
            raise MalformedXml(f"bad point {tok!r} in {s!r}") from exc
    return pts


# -- parsing -------------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el, name):
    return [c for c in el if _local(c.tag) == name]


def _child(el, name):
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _outline(el) -> Polygon:
    coords = _child(el, "Coords")
    ident = el.get("id", "?")
    if coords is None or not coords.get("points", "").strip():
        raise MissingCoords(f"{_local(el.tag)} {ident!r} has no Coords points")
    pts = parse_points(coords.get("points"))
    try:
        return Polygon(pts)
    except ValueError as exc:
        raise MissingCoords(f"{_local(el.tag)} {ident!r}: {exc}") from exc


def _line_text(el) -> str:
    equivs = _children(el, "TextEquiv")
    if not equivs:
        return ""
    # lowest index wins; unindexed TextEquiv count as index 0
    equivs.sort(key=lambda e: int(e.get("index", "0") or 0))
    uni = _child(equivs[0], "Unicode")
    text = uni.text if uni is not None and uni.text else ""
    return unicodedata.normalize("NFC", text)


def _parse_line(el) -> TextLine:
    ident = el.get("id")
    if not ident:
        raise InvalidPage("TextLine without id")
    baseline = None
    bl = _child(el, "Baseline")
    if bl is not None and bl.get("points", "").strip():
        baseline = tuple(parse_points(bl.get("points")))
    return TextLine(ident, _outline(el), _line_text(el), baseline)


def _int_attr(el, name, default=None):
    raw = el.get(name)
    if raw is None:
        if default is None:
            raise InvalidPage(f"{_local(el.tag)} {el.get('id')!r} lacks attribute {name}")
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidPage(f"{_local(el.tag)} {el.get('id')!r}: {name}={raw!r}") from exc


def parse_page(data: bytes | str) -> PageDocument:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    page = root if _local(root.tag) == "Page" else _child(root, "Page")
    if page is None:
        raise MalformedXml("no Page element")

    cells: list[CellRegion] = []
    lines: list[TextLine] = []
    cell_text: dict[str, tuple[str, ...]] = {}
    dropped = 0

    def collect_lines(el):
        for ln in el.iter():
            if _local(ln.tag) == "TextLine":
                lines.append(_parse_line(ln))

    for region in page:
        name = _local(region.tag)
        if name == "TableRegion":
            for tc in region.iter():
                if _local(tc.tag) != "TableCell":
                    continue
                cid = tc.get("id")
                if not cid:
                    raise InvalidPage("TableCell without id")
                cells.append(CellRegion(
                    cid, _outline(tc),
                    _int_attr(tc, "row"), _int_attr(tc, "col"),
                    _int_attr(tc, "rowSpan", 1), _int_attr(tc, "colSpan", 1),
                ))
                nested = [_parse_line(ln) for ln in _children(tc, "TextLine")]
                lines.extend(nested)
                if nested:
                    cell_text[cid] = tuple(ln.id for ln in nested)
        elif name in ("Coords", "PrintSpace", "ReadingOrder", "Border", "Layers", "Relations"):
            continue
        elif name.endswith("Region"):
            if region.get("id") != UNASSIGNED_REGION_ID:
                dropped += 1
            collect_lines(region)
        elif name == "TextLine":
            lines.append(_parse_line(region))
    if dropped:
        log.info("dropped %d non-table region(s); their text lines were kept", dropped)

    return PageDocument(
        image_ref=page.get("imageFilename", ""),
        image_width=_int_attr(page, "imageWidth", 0),
        image_height=_int_attr(page, "imageHeight", 0),
        cells=tuple(cells),
        lines=tuple(lines),
        cell_text=cell_text,
        dropped_regions=dropped,
    )


def read_page(path) -> PageDocument:
    with open(path, "rb") as fh:
        return parse_page(fh.read())


# -- serialization -------------------------------------------------------------

def _coords(parent, polygon: Polygon):
    ET.SubElement(parent, "Coords", points=format_points(polygon.vertices))


def _write_line(parent, line: TextLine):
    el = ET.SubElement(parent, "TextLine", id=line.id)
    _coords(el, line.outline)
    if line.baseline:
        ET.SubElement(el, "Baseline", points=format_points(line.baseline))
    te = ET.SubElement(el, "TextEquiv")
    ET.SubElement(te, "Unicode").text = line.text


def _bbox_polygon(polys) -> Polygon:
    xs, ys = [], []
    for p in polys:
        x0, y0, x1, y1 = p.bbox()
        xs += [x0, x1]
        ys += [y0, y1]
    return Polygon.rect(min(xs), min(ys), max(xs), max(ys))


def serialize_page(doc: PageDocument, creator: str = "tabkg") -> bytes:
    root = ET.Element("PcGts", xmlns=NS_2019)
    meta = ET.SubElement(root, "Metadata")
    ET.SubElement(meta, "Creator").text = creator
    ET.SubElement(meta, "Created").text = _TIMESTAMP
    ET.SubElement(meta, "LastChange").text = _TIMESTAMP
    page = ET.SubElement(
        root, "Page",
        imageFilename=doc.image_ref,
        imageWidth=str(doc.image_width),
        imageHeight=str(doc.image_height),
    )
    lines_by_id = {ln.id: ln for ln in doc.lines}
    placed: set[str] = set()
    if doc.cells:
        table = ET.SubElement(page, "TableRegion", id="table_1")
        _coords(table, _bbox_polygon(c.outline for c in doc.cells))
        for c in doc.cells:
            tc = ET.SubElement(
                table, "TableCell", id=c.id,
                row=str(c.row_index), col=str(c.col_index),
                rowSpan=str(c.row_span), colSpan=str(c.col_span),
            )
            _coords(tc, c.outline)
            for lid in doc.cell_text.get(c.id, ()):
                _write_line(tc, lines_by_id[lid])
                placed.add(lid)
    rest = [ln for ln in doc.lines if ln.id not in placed]
    if rest:
        region = ET.SubElement(page, "TextRegion", id=UNASSIGNED_REGION_ID)
        _coords(region, _bbox_polygon(ln.outline for ln in rest))
        for ln in rest:
            _write_line(region, ln)
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def write_page(doc: PageDocument, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_page(doc))
