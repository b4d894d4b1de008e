"""Schema-guided row-level information extraction."""

from .backends import Candidate, HttpBackend, RuleBackend, http_backend, parse_candidates, rule_backend
from .core import ExtractionRun, extract_document, restore_cell_provenance, run_extraction
from .records import (
    EntityRecord,
    NestedValue,
    PropertyValue,
    RecordFile,
    ValueProvenance,
    dumps_records,
    loads_records,
    read_records,
    write_records,
)
from .schema import ExtractionSchema, PropertySpec, load_schema, schema_from_dict
from .stats import ProvenanceStats, provenance_stats

__all__ = [
    "Candidate", "HttpBackend", "RuleBackend", "http_backend", "parse_candidates", "rule_backend",
    "ExtractionRun", "extract_document", "restore_cell_provenance", "run_extraction",
    "EntityRecord", "NestedValue", "PropertyValue", "RecordFile", "ValueProvenance",
    "dumps_records", "loads_records", "read_records", "write_records",
    "ExtractionSchema", "PropertySpec", "load_schema", "schema_from_dict",
    "ProvenanceStats", "provenance_stats",
]
