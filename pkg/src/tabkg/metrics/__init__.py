"""Stage-wise evaluation metrics."""

from .detection import (
    THRESHOLDS,
    MatchResult,
    match_at,
    match_boxes,
    mean_average_precision,
    precision_recall,
    precision_recall_at,
)
from .ie import align_entities, f1_score, ie_scores, prf
from .report import ImageMetrics, MetricsReport
from .ted import CostModel, rename_cost, ted_score, tree_edit_distance
from .text import content_distance, levenshtein, similarity

__all__ = [
    "THRESHOLDS", "MatchResult", "match_at", "match_boxes", "mean_average_precision",
    "precision_recall", "precision_recall_at", "align_entities", "f1_score", "ie_scores",
    "prf", "ImageMetrics", "MetricsReport", "CostModel", "rename_cost", "ted_score",
    "tree_edit_distance", "content_distance", "levenshtein", "similarity",
]
