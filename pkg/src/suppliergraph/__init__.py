"""Collaborative supply-chain-transparency platform.

Mines public supplier disclosures into a provenance-tracked company graph,
predicts hidden links per industry/region group, reports transparency
statistics, and serves a collaboration API for verified company
representatives.
"""

from .errors import SupplierGraphError
from .graph import SCHEMA_VERSION, SupplierGraph, load_snapshot
from .matching import (
    DEFAULT_MATCH_THRESHOLD,
    LEGAL_SUFFIXES,
    MatchResult,
    company_id_for,
    match_registry,
    normalize_name,
    similarity,
)
from .model import (
    Company,
    ContentType,
    GraphSnapshot,
    MetadataSource,
    Origin,
    RELIABILITY_THRESHOLD,
    Review,
    SourceDocument,
    SupplierRelation,
)

__version__ = "0.1.0"

__all__ = [
    "Company",
    "ContentType",
    "DEFAULT_MATCH_THRESHOLD",
    "GraphSnapshot",
    "LEGAL_SUFFIXES",
    "MatchResult",
    "MetadataSource",
    "Origin",
    "RELIABILITY_THRESHOLD",
    "Review",
    "SCHEMA_VERSION",
    "SourceDocument",
    "SupplierGraph",
    "SupplierGraphError",
    "SupplierRelation",
    "company_id_for",
    "load_snapshot",
    "match_registry",
    "normalize_name",
    "similarity",
]
