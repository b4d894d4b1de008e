"""SVG overlays of detected cell regions (and optionally text lines) on a page."""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

from .pagexml import PageDocument, format_points


def overlay_svg(doc: PageDocument, show_lines: bool = False) -> str:
    w = doc.image_width or _extent(doc, 2)
    h = doc.image_height or _extent(doc, 3)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
    ]
    if doc.image_ref:
        out.append(f"  <title>{escape(doc.image_ref)}</title>")
    out.append('  <g id="cells" fill="none" stroke="#d62728" stroke-width="2">')
    for c in doc.cells:
        pts = format_points(c.outline.vertices)
        out.append(f"    <polygon id={quoteattr('cell-' + c.id)} points={quoteattr(pts)}/>")
    out.append("  </g>")
    out.append('  <g id="cell-labels" font-family="sans-serif" font-size="12" fill="#d62728">')
    for c in doc.cells:
        x0, y0, _, _ = c.outline.bbox()
        out.append(f'    <text x="{x0 + 3:g}" y="{y0 + 14:g}">{escape(c.id)}</text>')
    out.append("  </g>")
    if show_lines:
        out.append('  <g id="lines" fill="none" stroke="#1f77b4" stroke-width="1" stroke-dasharray="4 2">')
        for ln in doc.lines:
            pts = format_points(ln.outline.vertices)
            out.append(f"    <polygon id={quoteattr('line-' + ln.id)} points={quoteattr(pts)}/>")
        out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _extent(doc: PageDocument, idx: int) -> int:
    boxes = [c.outline.bbox() for c in doc.cells] + [ln.outline.bbox() for ln in doc.lines]
    return int(max((b[idx] for b in boxes), default=0))
