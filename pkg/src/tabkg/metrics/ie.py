"""Entity-level alignment and property-level precision / recall / F1."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..extract.records import EntityRecord
from .assignment import optimal_pairs
from .text import similarity

DEFAULT_SIM_THRESHOLD = 0.6


def flatten(record: EntityRecord) -> dict[str, str]:
    """Property path -> value; repeated paths get ``#2``, ``#3``... suffixes."""
    out: dict[str, str] = {}
    seen: Counter = Counter()
    for path, pv in record.leaves():
        seen[path] += 1
        key = path if seen[path] == 1 else f"{path}#{seen[path]}"
        out[key] = pv.value
    return out


def entity_similarity(a: dict[str, str], b: dict[str, str]) -> float:
    return sum(similarity(a[k], b[k]) for k in a.keys() & b.keys())


def align_entities(pred: Sequence[EntityRecord], gt: Sequence[EntityRecord]) -> list[tuple[int, int]]:
    if not pred or not gt:
        return []
    fp = [flatten(r) for r in pred]
    fg = [flatten(r) for r in gt]
    scores = np.array([[entity_similarity(p, g) for g in fg] for p in fp])
    return [(i, j) for i, j, _ in optimal_pairs(scores)]


@dataclass(frozen=True)
class IEScores:
    tp: int
    n_pred: int
    n_gt: int

    @property
    def precision(self) -> float:
        return self.tp / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gt if self.n_gt else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.precision, self.recall, self.f1


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def prf(tp: int, n_pred: int, n_gt: int) -> tuple[float, float, float]:
    return IEScores(tp, n_pred, n_gt).as_tuple()


def count_matches(pred, gt, sim_threshold: float = DEFAULT_SIM_THRESHOLD) -> IEScores:
    fp = [flatten(r) for r in pred]
    fg = [flatten(r) for r in gt]
    tp = 0
    for i, j in align_entities(pred, gt):
        for key in fp[i].keys() & fg[j].keys():
            if fp[i][key].strip() and similarity(fp[i][key], fg[j][key]) >= sim_threshold:
                tp += 1
    n_pred = sum(1 for f in fp for v in f.values() if v.strip())
    n_gt = sum(len(f) for f in fg)
    return IEScores(tp, n_pred, n_gt)


def ie_scores(pred: Sequence[EntityRecord], gt: Sequence[EntityRecord],
              sim_threshold: float = DEFAULT_SIM_THRESHOLD) -> tuple[float, float, float]:
    return count_matches(pred, gt, sim_threshold).as_tuple()
