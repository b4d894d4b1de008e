"""Assertion and provenance graph construction and RDF serialization."""

from .build import (
    GraphContext,
    build_assertion_graph,
    build_provenance_graph,
    closure_problems,
    contexts_for,
    doc_slug,
    drop_unknown_cells,
    image_iri,
    mint_entity_iri,
    provenance_graph_iri,
)
from .config import NamespaceConfig, load_namespaces, namespaces_from_dict
from .serialize import serialize_quads, to_nquads, to_trig
from .terms import IRI, BNode, Literal, Quad

__all__ = [
    "GraphContext", "build_assertion_graph", "build_provenance_graph", "closure_problems",
    "contexts_for", "doc_slug", "drop_unknown_cells", "image_iri", "mint_entity_iri",
    "provenance_graph_iri", "NamespaceConfig", "load_namespaces", "namespaces_from_dict",
    "serialize_quads", "to_nquads", "to_trig", "IRI", "BNode", "Literal", "Quad",
]
