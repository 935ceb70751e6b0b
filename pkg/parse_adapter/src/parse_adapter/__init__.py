"""JSONL to CoNLL-U dependency parsing adapter."""

from .adapter import AdapterConfig, ParseSummary, parse_corpus
from .backends import RuleBackend, SpacyBackend, Word, get_backend
from .errors import BackendParseError, DataError

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "BackendParseError",
    "DataError",
    "ParseSummary",
    "RuleBackend",
    "SpacyBackend",
    "Word",
    "get_backend",
    "parse_corpus",
]
