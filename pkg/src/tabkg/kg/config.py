"""Namespace configuration for minted IRIs and serialization prefixes.

YAML layout (all keys optional)::

    base: https://example.org/
    schema: https://example.org/schema#
    schema_prefix: ex
    vocab: https://example.org/tabkg#
    vocab_prefix: tp
    prefixes:
      foaf: http://xmlns.com/foaf/0.1/
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from ..errors import KGError
from .terms import IRI, PROV, RDF, RDFS, XSD

DEFAULT_BASE = "https://example.org/"
DEFAULT_SCHEMA = "https://example.org/schema#"
DEFAULT_VOCAB = "https://example.org/tabkg#"


@dataclass(frozen=True)
class NamespaceConfig:
    base: str = DEFAULT_BASE
    schema: str = DEFAULT_SCHEMA
    schema_prefix: str = "ex"
    vocab: str = DEFAULT_VOCAB
    vocab_prefix: str = "tp"
    extra_prefixes: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        for name in ("base", "schema", "vocab"):
            IRI(getattr(self, name))
        if not self.base.endswith(("/", "#")):
            raise KGError(f"base IRI must end with '/' or '#': {self.base!r}")

    def prefixes(self) -> dict[str, str]:
        out = {"rdf": RDF, "rdfs": RDFS, "xsd": XSD, "prov": PROV,
               self.schema_prefix: self.schema, self.vocab_prefix: self.vocab}
        out.update(self.extra_prefixes)
        return dict(sorted(out.items()))

    def term(self, local: str) -> IRI:
        return IRI(self.schema + local)

    def vocab_term(self, local: str) -> IRI:
        return IRI(self.vocab + local)


def namespaces_from_dict(raw: dict | None) -> NamespaceConfig:
    raw = raw or {}
    kwargs = {k: raw[k] for k in ("base", "schema", "schema_prefix", "vocab", "vocab_prefix") if k in raw}
    return NamespaceConfig(**kwargs, extra_prefixes=dict(raw.get("prefixes") or {}))


def load_namespaces(path) -> NamespaceConfig:
    with open(path, encoding="utf-8") as fh:
        return namespaces_from_dict(yaml.safe_load(fh))
