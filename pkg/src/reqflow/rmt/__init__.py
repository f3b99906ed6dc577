"""Embedded requirements store: items, relationships, review states, subset
derivation, and deterministic XML exports."""

from reqflow.rmt.store import (
    DuplicateItemError,
    IllegalTransitionError,
    Relationship,
    RmtError,
    RmtItem,
    RmtStore,
    SubsetReport,
    UnknownItemError,
    ValidationError,
)

__all__ = [
    "DuplicateItemError",
    "IllegalTransitionError",
    "Relationship",
    "RmtError",
    "RmtItem",
    "RmtStore",
    "SubsetReport",
    "UnknownItemError",
    "ValidationError",
]
