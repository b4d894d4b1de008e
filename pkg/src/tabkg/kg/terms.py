"""A minimal RDF term model: IRIs, blank nodes, literals and quads."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from ..errors import KGError

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
PROV = "http://www.w3.org/ns/prov#"
SH = "http://www.w3.org/ns/shacl#"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DATE = XSD + "date"
RDF_LANGSTRING = RDF + "langString"

_IRI = re.compile(r'^[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20<>"{}|^`\\]*$')
_BNODE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_\-.]*$")


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self):
        if not _IRI.match(self.value):
            raise KGError(f"not an absolute IRI: {self.value!r}")

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class BNode:
    label: str

    def __post_init__(self):
        if not _BNODE.match(self.label) or self.label.endswith("."):
            raise KGError(f"invalid blank node label: {self.label!r}")


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    lang: Optional[str] = None

    def __post_init__(self):
        if self.lang:
            object.__setattr__(self, "lang", self.lang.lower())
            object.__setattr__(self, "datatype", RDF_LANGSTRING)
        elif self.datatype is None:
            object.__setattr__(self, "datatype", XSD_STRING)


Term = Union[IRI, BNode, Literal]


@dataclass(frozen=True)
class Quad:
    subject: Union[IRI, BNode]
    predicate: IRI
    object: Term
    graph: Optional[IRI] = None

    def __post_init__(self):
        if not isinstance(self.predicate, IRI):
            raise KGError(f"predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.subject, (IRI, BNode)):
            raise KGError(f"subject must be an IRI or blank node, got {self.subject!r}")

    def triple(self):
        return self.subject, self.predicate, self.object


def rdf(local: str) -> IRI:
    return IRI(RDF + local)


def prov(local: str) -> IRI:
    return IRI(PROV + local)


RDF_TYPE = IRI(RDF + "type")
