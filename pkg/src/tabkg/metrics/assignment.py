"""Optimal one-to-one matching on a score matrix."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def optimal_pairs(scores) -> list[tuple[int, int, float]]:
    """Maximum-total-score partial matching; zero-score pairs are dropped.

    ``scores`` is an (n_rows, n_cols) array of non-negative values.  The
    matrix is padded to a square and solved as a minimum-cost assignment on
    ``max_score - score``.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or 0 in scores.shape:
        return []
    n = max(scores.shape)
    padded = np.zeros((n, n))
    padded[: scores.shape[0], : scores.shape[1]] = scores
    top = max(1.0, float(padded.max()))
    rows, cols = linear_sum_assignment(top - padded)
    pairs = []
    for r, c in zip(rows, cols):
        if r < scores.shape[0] and c < scores.shape[1] and scores[r, c] > 0:
            pairs.append((int(r), int(c), float(scores[r, c])))
    return pairs
