"""Provenance-aware table-to-knowledge-graph pipeline.

Stages: reconstruct a logical table from PageXML cell regions and text lines,
extract one schema-guided entity per row with span and cell provenance, and
build RDF assertion and provenance graphs; plus the metrics that evaluate
each stage.
"""

__version__ = "0.1.0"
