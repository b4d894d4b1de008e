"""Edit distance and the normalized string similarity used by the metrics."""

import re

_WS = re.compile(r"\s+")


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def content_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer length; 0.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def normalize(s: str) -> str:
    return _WS.sub(" ", s.casefold()).strip()


def similarity(a: str, b: str) -> float:
    """1 - normalized Levenshtein on case-folded, whitespace-collapsed strings."""
    return 1.0 - content_distance(normalize(a), normalize(b))
