"""Association rule mining with ontology-guided post-processing."""

from ._core import (
    Dataset,
    Error,
    Ontology,
    Rule,
    RuleSet,
    Script,
    Session,
    format_schema,
    format_script,
    item_extension,
    mine,
    parse_script,
    read_rules,
    write_rules,
)

__all__ = [
    "Dataset",
    "Error",
    "Ontology",
    "Rule",
    "RuleSet",
    "Script",
    "Session",
    "format_schema",
    "format_script",
    "item_extension",
    "mine",
    "parse_script",
    "read_rules",
    "write_rules",
]
