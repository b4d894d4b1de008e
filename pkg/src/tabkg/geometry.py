"""Planar polygon primitives and overlap measures.

Coordinates are image pixels.  Polygons are stored with a non-negative
shoelace signed area (counter-clockwise in a y-up frame), which keeps the
clipping code free of orientation branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import GeometryError, NonConvexClip, ZeroAreaLine


class Point(NamedTuple):
    x: float
    y: float


def _signed_area(pts: Sequence[Point]) -> float:
    n = len(pts)
    s = 0.0
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2.0


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]

    def __init__(self, vertices: Iterable[Sequence[float]]):
        pts = tuple(Point(float(x), float(y)) for x, y in vertices)
        if len(pts) < 3:
            raise GeometryError(f"polygon needs at least 3 vertices, got {len(pts)}")
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise GeometryError(f"non-finite vertex {p}")
        if _signed_area(pts) < 0:
            # reverse but keep the first vertex in place
            pts = (pts[0],) + tuple(reversed(pts[1:]))
        object.__setattr__(self, "vertices", pts)

    @classmethod
    def rect(cls, x0: float, y0: float, x1: float, y1: float) -> "Polygon":
        """Axis-aligned rectangle from two opposite corners."""
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def area(self) -> float:
        return polygon_area(self)

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def centroid(self) -> Point:
        """Area centroid; falls back to the vertex mean for degenerate outlines."""
        pts = self.vertices
        a = _signed_area(pts)
        if abs(a) < 1e-12:
            n = len(pts)
            return Point(sum(p.x for p in pts) / n, sum(p.y for p in pts) / n)
        cx = cy = 0.0
        n = len(pts)
        for i in range(n):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % n]
            c = x0 * y1 - x1 * y0
            cx += (x0 + x1) * c
            cy += (y0 + y1) * c
        return Point(cx / (6 * a), cy / (6 * a))

    def translate(self, dx: float, dy: float) -> "Polygon":
        return Polygon([(p.x + dx, p.y + dy) for p in self.vertices])


def polygon_area(p: Polygon) -> float:
    return abs(_signed_area(p.vertices))


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def is_convex(p: Polygon) -> bool:
    """Cross-product sign test, tolerant to collinear and near-collinear vertices.

    Relies on the stored counter-clockwise orientation: every turn must be a
    left turn up to ``1e-9 * diag**2`` where ``diag`` is the bounding-box
    diagonal.
    """
    x0, y0, x1, y1 = p.bbox()
    eps = 1e-9 * ((x1 - x0) ** 2 + (y1 - y0) ** 2)
    pts = p.vertices
    n = len(pts)
    for i in range(n):
        if _cross(pts[i - 1], pts[i], pts[(i + 1) % n]) < -eps:
            return False
    return True


def _clip(subject: list[Point], clip: Sequence[Point]) -> list[Point]:
    # Sutherland-Hodgman against a CCW convex clip polygon
    out = subject
    n = len(clip)
    for i in range(n):
        c1 = clip[i]
        c2 = clip[(i + 1) % n]
        if c1 == c2:
            continue
        if not out:
            break
        inp = out
        out = []
        s = inp[-1]
        ds = _cross(c1, c2, s)
        for e in inp:
            de = _cross(c1, c2, e)
            if de >= 0:
                if ds < 0:
                    t = ds / (ds - de)
                    out.append(Point(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y)))
                out.append(e)
            elif ds >= 0:
                t = ds / (ds - de)
                out.append(Point(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y)))
            s, ds = e, de
    return out


def intersection_area(a: Polygon, b: Polygon) -> float:
    """Area of ``a`` intersected with the convex polygon ``b``.

    ``a`` may be non-convex.  Raises NonConvexClip if ``b`` fails the
    convexity test.
    """
    if not is_convex(b):
        raise NonConvexClip(f"clip polygon is not convex: {b.vertices}")
    area_a, area_b = polygon_area(a), polygon_area(b)
    if area_a == 0.0 or area_b == 0.0:
        return 0.0
    ax0, ay0, ax1, ay1 = a.bbox()
    bx0, by0, bx1, by1 = b.bbox()
    if ax1 <= bx0 or bx1 <= ax0 or ay1 <= by0 or by1 <= ay0:
        return 0.0
    clipped = _clip(list(a.vertices), b.vertices)
    if len(clipped) < 3:
        return 0.0
    inter = abs(_signed_area(clipped))
    return min(inter, area_a, area_b)


def iou(a: Polygon, b: Polygon) -> float:
    inter = intersection_area(a, b)
    union = polygon_area(a) + polygon_area(b) - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def overlap_ratio(line: Polygon, cell: Polygon, relative_to: str = "line") -> float:
    """Share of the line (or, with ``relative_to="cell"``, of the cell) covered by both.

    The default measures how much of the line lies inside the cell, so a line
    belongs to whichever cell holds most of it.
    """
    if relative_to == "line":
        denom = polygon_area(line)
        if denom == 0.0:
            raise ZeroAreaLine("text line outline has zero area")
    elif relative_to == "cell":
        denom = polygon_area(cell)
        if polygon_area(line) == 0.0:
            raise ZeroAreaLine("text line outline has zero area")
        if denom == 0.0:
            return 0.0
    else:
        raise ValueError(f"relative_to must be 'line' or 'cell', not {relative_to!r}")
    return min(1.0, intersection_area(line, cell) / denom)
