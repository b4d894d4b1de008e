import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import monte_carlo_intersection, point_in_polygon, random_convex
from tabkg.errors import NonConvexClip, ZeroAreaLine
from tabkg.geometry import Polygon, intersection_area, iou, is_convex, overlap_ratio, polygon_area

UNIT = Polygon.rect(0, 0, 1, 1)


def test_polygon_area_examples():
    assert polygon_area(UNIT) == 1.0
    assert polygon_area(Polygon([(0, 0), (2, 0), (0, 2)])) == 2.0
    assert polygon_area(Polygon([(0, 0), (1, 1), (2, 2)])) == 0.0


def test_orientation_is_normalized():
    cw = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert polygon_area(cw) == 1.0
    assert cw.vertices[0] == (0, 0)
    signed = sum(a.x * b.y - b.x * a.y for a, b in zip(cw.vertices, cw.vertices[1:] + cw.vertices[:1]))
    assert signed > 0


def test_polygon_needs_three_vertices():
    with pytest.raises(ValueError):
        Polygon([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        Polygon([(0, 0), (1, math.nan), (1, 1)])


def test_intersection_examples():
    assert intersection_area(UNIT, UNIT) == 1.0
    assert intersection_area(UNIT, Polygon.rect(5, 5, 6, 6)) == 0.0
    assert intersection_area(UNIT, UNIT.translate(0.5, 0.5)) == pytest.approx(0.25, abs=1e-9)


def test_shifted_square_agrees_with_monte_carlo():
    rng = np.random.default_rng(7)
    shifted = UNIT.translate(0.5, 0.5)
    est, _ = monte_carlo_intersection(UNIT.vertices, shifted.vertices, 10**6, rng)
    assert abs(est - 0.25) < 1e-2
    assert abs(intersection_area(UNIT, shifted) - est) < 1e-2


def test_iou_examples():
    assert iou(UNIT, UNIT) == 1.0
    assert iou(UNIT, Polygon.rect(5, 5, 6, 6)) == 0.0
    assert iou(UNIT, Polygon.rect(0.5, 0, 1.5, 1)) == pytest.approx(1 / 3, abs=1e-12)


def test_overlap_ratio_examples():
    cell = Polygon.rect(0, 0, 100, 50)
    assert overlap_ratio(Polygon.rect(10, 10, 20, 20), cell) == 1.0
    assert overlap_ratio(Polygon.rect(200, 0, 210, 10), cell) == 0.0
    # a 10 x 1 line with 2 units inside the cell
    line = Polygon.rect(98, 5, 108, 6)
    assert polygon_area(line) == 10.0
    assert overlap_ratio(line, cell) == pytest.approx(0.2, abs=1e-12)


def test_overlap_ratio_relative_to_cell():
    cell = Polygon.rect(0, 0, 10, 10)
    line = Polygon.rect(0, 0, 5, 2)
    assert overlap_ratio(line, cell, relative_to="cell") == pytest.approx(0.1)
    with pytest.raises(ValueError):
        overlap_ratio(line, cell, relative_to="page")


def test_zero_area_line():
    with pytest.raises(ZeroAreaLine):
        overlap_ratio(Polygon([(0, 0), (1, 1), (2, 2)]), UNIT)


def test_non_convex_clip():
    notch = Polygon([(0, 0), (4, 0), (4, 4), (2, 1), (0, 4)])
    assert not is_convex(notch)
    with pytest.raises(NonConvexClip):
        intersection_area(UNIT, notch)
    # strip [0,4]x[0,2] minus the notch wedge between y=1 and y=2 (area 2/3)
    assert intersection_area(notch, Polygon.rect(0, 0, 4, 2)) == pytest.approx(8 - 2 / 3, abs=1e-12)


def test_collinear_vertices_still_convex():
    assert is_convex(Polygon([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)]))


def test_point_in_polygon_oracle_sanity():
    assert point_in_polygon(0.5, 0.5, UNIT.vertices)
    assert not point_in_polygon(1.5, 0.5, UNIT.vertices)


def test_monte_carlo_oracle_on_random_convex_pairs():
    rng = np.random.default_rng(20240611)
    for _ in range(100):
        a = random_convex(rng, rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(1, 5), rng.integers(3, 9))
        b = random_convex(rng, rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(1, 5), rng.integers(3, 9))
        exact = intersection_area(Polygon(a), Polygon(b))
        est, sigma = monte_carlo_intersection(a, b, 200_000, rng)
        assert abs(exact - est) <= 3 * sigma + 1e-9, (a, b, exact, est, sigma)


coord = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)
size = st.floats(min_value=0.01, max_value=30, allow_nan=False, allow_infinity=False)


@st.composite
def rects(draw):
    x, y, w, h = draw(coord), draw(coord), draw(size), draw(size)
    return Polygon.rect(x, y, x + w, y + h)


@settings(max_examples=300, deadline=None)
@given(rects(), rects())
def test_iou_symmetric(a, b):
    assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(rects(), rects())
def test_intersection_bounds(a, b):
    inter = intersection_area(a, b)
    assert 0.0 <= inter <= min(polygon_area(a), polygon_area(b)) + 1e-9


@settings(max_examples=300, deadline=None)
@given(rects(), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_contained_line_ratio_is_one(cell, fx0, fy0, fx1, fy1):
    x0, y0, x1, y1 = cell.bbox()
    w, h = x1 - x0, y1 - y0
    lx0, lx1 = sorted((x0 + fx0 * w, x0 + fx1 * w))
    ly0, ly1 = sorted((y0 + fy0 * h, y0 + fy1 * h))
    if lx1 - lx0 < 1e-6 or ly1 - ly0 < 1e-6:
        return
    assert overlap_ratio(Polygon.rect(lx0, ly0, lx1, ly1), cell) == pytest.approx(1.0, abs=1e-9)
