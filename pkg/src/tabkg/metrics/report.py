"""Per-image metric rows and their corpus average."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

FIELDS = ("map", "ted", "ted_struct", "ie_precision", "ie_recall", "ie_f1")


@dataclass
class ImageMetrics:
    image: str
    map: Optional[float] = None
    ted: Optional[float] = None
    ted_struct: Optional[float] = None
    ie_precision: Optional[float] = None
    ie_recall: Optional[float] = None
    ie_f1: Optional[float] = None


@dataclass
class MetricsReport:
    """Per-image rows plus arithmetic means over the images that have each metric."""

    images: list[ImageMetrics] = field(default_factory=list)

    def mean(self, name: str) -> Optional[float]:
        vals = [getattr(row, name) for row in self.images if getattr(row, name) is not None]
        return sum(vals) / len(vals) if vals else None

    @property
    def map(self):
        return self.mean("map")

    @property
    def ted(self):
        return self.mean("ted")

    @property
    def ted_struct(self):
        return self.mean("ted_struct")

    @property
    def ie_precision(self):
        return self.mean("ie_precision")

    @property
    def ie_recall(self):
        return self.mean("ie_recall")

    @property
    def ie_f1(self):
        return self.mean("ie_f1")

    def columns(self) -> list[str]:
        return [f for f in FIELDS if any(getattr(r, f) is not None for r in self.images)]

    def to_tsv(self) -> str:
        cols = self.columns()
        lines = ["\t".join(["image", *cols])]
        for row in self.images:
            lines.append("\t".join([row.image, *(_fmt(getattr(row, c)) for c in cols)]))
        lines.append("\t".join(["mean", *(_fmt(self.mean(c)) for c in cols)]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        cols = self.columns()
        payload = {
            "images": [
                {"image": r.image, **{c: getattr(r, c) for c in cols}} for r in self.images
            ],
            "mean": {c: self.mean(c) for c in cols},
        }
        return json.dumps(payload, indent=2) + "\n"


def _fmt(v) -> str:
    return "" if v is None else f"{v:.4f}"
