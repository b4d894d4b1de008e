"""Extractor backends.

A backend turns one row of text into candidate ``(property, value, span)``
triples.  ``property`` is a schema path (``name`` or ``place.name``); spans
are character offsets into ``row.text``.
"""

from __future__ import annotations

import json
import logging
import socket
import urllib.error
import urllib.request
from typing import NamedTuple, Optional, Protocol

from ..errors import BackendFailure
from ..table import RowText
from .schema import ExtractionSchema, PropertySpec

log = logging.getLogger(__name__)


class Candidate(NamedTuple):
    property: str
    value: str
    span: Optional[tuple[int, int]] = None


class ExtractorBackend(Protocol):
    def extract(self, row: RowText, schema: ExtractionSchema) -> list[Candidate]:
        ...


class RuleBackend:
    """Deterministic extractor driven by column bindings and regular expressions.

    A column-bound property yields the bound cell's text.  A pattern yields
    its first match (group 1 if the pattern has groups), searched inside the
    bound cell when there is one, else across the whole row.
    """

    def __init__(self, schema: ExtractionSchema):
        missing = [p.name for p in schema.properties
                   if not (p.has_hint or any(a.has_hint for a in p.attributes))]
        if missing:
            log.warning("properties without rule hints will never be extracted: %s", missing)
        self.schema = schema

    def extract(self, row: RowText, schema: Optional[ExtractionSchema] = None) -> list[Candidate]:
        schema = schema or self.schema
        out = []
        for spec in schema.properties:
            if spec.kind == "named-entity":
                for attr in spec.attributes:
                    c = self._apply(attr, f"{spec.name}.{attr.name}", row)
                    if c:
                        out.append(c)
            else:
                c = self._apply(spec, spec.name, row)
                if c:
                    out.append(c)
        return out

    @staticmethod
    def _apply(spec: PropertySpec, path: str, row: RowText) -> Optional[Candidate]:
        if spec.column is not None:
            seg = row.segment_for_column(spec.column)
            if seg is None:
                return None
            start, end = seg.start, seg.end
        elif spec.pattern is not None:
            start, end = 0, len(row.text)
        else:
            return None
        if spec.pattern is None:
            return Candidate(path, row.text[start:end], (start, end))
        m = spec.pattern.search(row.text, start, end)
        if m is None:
            return None
        group = 1 if spec.pattern.groups else 0
        if m.start(group) < 0:
            return None
        return Candidate(path, m.group(group), (m.start(group), m.end(group)))


def rule_backend(schema: ExtractionSchema) -> RuleBackend:
    return RuleBackend(schema)


def parse_candidates(payload, text_length: int) -> list[Candidate]:
    """Validate a decoded backend response; malformed entries are dropped with a warning."""
    if isinstance(payload, dict):
        payload = payload.get("values", payload.get("candidates"))
    if not isinstance(payload, list):
        raise BackendFailure("backend response is not a list of values")
    out = []
    for i, entry in enumerate(payload):
        if not isinstance(entry, dict):
            log.warning("discarding backend entry %d: not an object", i)
            continue
        prop, value = entry.get("property"), entry.get("value")
        if not isinstance(prop, str) or not isinstance(value, (str, int, float)) or isinstance(value, bool):
            log.warning("discarding backend entry %d: needs string property and value", i)
            continue
        span = entry.get("span")
        if span is not None:
            ok = (isinstance(span, (list, tuple)) and len(span) == 2
                  and all(isinstance(x, int) and not isinstance(x, bool) for x in span)
                  and 0 <= span[0] <= span[1] <= text_length)
            if not ok:
                log.warning("backend entry %d (%s): ignoring invalid span %r", i, prop, span)
                span = None
            else:
                span = (span[0], span[1])
        out.append(Candidate(prop, str(value), span))
    return out


class HttpBackend:
    """Calls a remote extractor: POST ``{model, schema, text}`` per row.

    The response is a JSON list of ``{property, value, span?}`` objects (or an
    object holding that list under ``values``).
    """

    def __init__(self, endpoint: str, model: str = "", timeout: float = 30.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def extract(self, row: RowText, schema: ExtractionSchema) -> list[Candidate]:
        body = json.dumps(
            {"model": self.model, "schema": schema.descriptor(), "text": row.text},
            ensure_ascii=False,
        ).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=body, method="POST",
            headers={"Content-Type": "application/json; charset=utf-8"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                raw = resp.read()
        except (urllib.error.URLError, socket.timeout, TimeoutError, ConnectionError, OSError) as exc:
            raise BackendFailure(f"{self.endpoint}: {exc}") from exc
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BackendFailure(f"{self.endpoint}: response is not JSON ({exc})") from exc
        return parse_candidates(payload, len(row.text))


def http_backend(endpoint: str, model: str = "", timeout: float = 30.0) -> HttpBackend:
    return HttpBackend(endpoint, model, timeout)
