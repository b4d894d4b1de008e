"""Deterministic N-Quads and TriG writers."""

from __future__ import annotations

import re
from itertools import groupby
from typing import Iterable, Mapping, Optional

from .terms import IRI, XSD_STRING, BNode, Literal, Quad

_ECHAR = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}
_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch in _ECHAR:
            out.append(_ECHAR[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def nt_term(t) -> str:
    if isinstance(t, IRI):
        return f"<{t.value}>"
    if isinstance(t, BNode):
        return f"_:{t.label}"
    if isinstance(t, Literal):
        lex = f'"{_escape(t.lexical)}"'
        if t.lang:
            return f"{lex}@{t.lang}"
        if t.datatype == XSD_STRING:
            return lex
        return f"{lex}^^<{t.datatype}>"
    raise TypeError(f"not an RDF term: {t!r}")


def sort_key(q: Quad):
    return (nt_term(q.graph) if q.graph is not None else "",
            nt_term(q.subject), nt_term(q.predicate), nt_term(q.object))


def _unique_sorted(quads: Iterable[Quad]) -> list[Quad]:
    return sorted(set(quads), key=sort_key)


def to_nquads(quads: Iterable[Quad]) -> str:
    lines = []
    for q in _unique_sorted(quads):
        parts = [nt_term(q.subject), nt_term(q.predicate), nt_term(q.object)]
        if q.graph is not None:
            parts.append(nt_term(q.graph))
        lines.append(" ".join(parts) + " .")
    return "".join(line + "\n" for line in lines)


class _Compactor:
    def __init__(self, prefixes: Mapping[str, str]):
        # longest namespace first so nested namespaces pick the specific prefix
        self.prefixes = sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def iri(self, value: str) -> str:
        for prefix, ns in self.prefixes:
            if value.startswith(ns):
                local = value[len(ns):]
                if local == "" or _LOCAL.match(local):
                    return f"{prefix}:{local}"
        return f"<{value}>"

    def term(self, t) -> str:
        if isinstance(t, IRI):
            if t.value == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type":
                return "a"
            return self.iri(t.value)
        if isinstance(t, Literal) and not t.lang and t.datatype != XSD_STRING:
            return f'"{_escape(t.lexical)}"^^{self.iri(t.datatype)}'
        return nt_term(t)

    def subject(self, t) -> str:
        if isinstance(t, IRI):
            return self.iri(t.value)
        return nt_term(t)


def to_trig(quads: Iterable[Quad], prefixes: Optional[Mapping[str, str]] = None) -> str:
    prefixes = dict(sorted((prefixes or {}).items()))
    c = _Compactor(prefixes)
    out = [f"@prefix {p}: <{ns}> .\n" for p, ns in prefixes.items()]
    for graph, group in groupby(_unique_sorted(quads), key=lambda q: q.graph):
        out.append("\n")
        out.append("{\n" if graph is None else f"{c.subject(graph)} {{\n")
        for subj, triples in groupby(group, key=lambda q: q.subject):
            triples = list(triples)
            body = " ;\n        ".join(f"{c.term(q.predicate)} {c.term(q.object)}" for q in triples)
            out.append(f"    {c.subject(subj)} {body} .\n")
        out.append("}\n")
    return "".join(out)


def serialize_quads(quads: Iterable[Quad], format: str = "trig",
                    prefixes: Optional[Mapping[str, str]] = None) -> bytes:
    fmt = format.lower().replace("-", "")
    if fmt == "nquads":
        return to_nquads(quads).encode("utf-8")
    if fmt == "trig":
        return to_trig(quads, prefixes).encode("utf-8")
    raise ValueError(f"unsupported format {format!r}; use trig or nquads")
