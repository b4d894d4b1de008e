"""Cell-detection evaluation: IoU matching and threshold-swept mAP."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..geometry import Polygon, iou
from .assignment import optimal_pairs

THRESHOLDS = tuple(round(0.1 * k, 1) for k in range(1, 11))
# absorbs rounding so that identical boxes still count at threshold 1.0
_IOU_EPS = 1e-9


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int, float], ...]
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return precision_recall(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return precision_recall(self.tp, self.fp, self.fn)[1]


def match_boxes(pred: Sequence[Polygon], gt: Sequence[Polygon]) -> list[tuple[int, int, float]]:
    if not pred or not gt:
        return []
    scores = np.array([[iou(p, g) for g in gt] for p in pred])
    return optimal_pairs(scores)


def precision_recall(tp: int, fp: int, fn: int) -> tuple[float, float]:
    n_pred, n_gt = tp + fp, tp + fn
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gt if n_gt else 0.0
    return precision, recall


def match_at(pairs, n_pred: int, n_gt: int, threshold: float) -> MatchResult:
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    kept = tuple(p for p in pairs if p[2] >= threshold - _IOU_EPS)
    tp = len(kept)
    return MatchResult(kept, tp, n_pred - tp, n_gt - tp)


def precision_recall_at(pairs, n_pred: int, n_gt: int, threshold: float) -> tuple[float, float]:
    m = match_at(pairs, n_pred, n_gt, threshold)
    return precision_recall(m.tp, m.fp, m.fn)


def pr_curve(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Turn (recall, precision) samples into the curve that gets integrated.

    Sorted by recall (higher precision first on ties), anchored at recall 0
    with the first point's precision, one point per recall value keeping the
    best precision.
    """
    if not points:
        return []
    ordered = sorted(points, key=lambda rp: (rp[0], -rp[1]))
    curve = [(0.0, ordered[0][1])]
    for r, p in ordered:
        if r == curve[-1][0]:
            if p > curve[-1][1]:
                curve[-1] = (r, p)
        else:
            curve.append((r, p))
    return curve


def area_under(curve: Sequence[tuple[float, float]]) -> float:
    total = 0.0
    for (r0, p0), (r1, p1) in zip(curve, curve[1:]):
        total += (r1 - r0) * (p0 + p1) / 2.0
    return min(1.0, max(0.0, total))


def mean_average_precision(pred: Sequence[Polygon], gt: Sequence[Polygon],
                           thresholds: Sequence[float] = THRESHOLDS) -> float:
    pairs = match_boxes(pred, gt)
    points = [precision_recall_at(pairs, len(pred), len(gt), t)[::-1] for t in thresholds]
    return area_under(pr_curve(points))
