"""Domain types for the supplier-relation graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from .errors import InvalidRecordError
from .matching import company_id_for

CONTINENTS = ("EU", "AF", "NA", "AS", "SA", "OC", "ME")

# Documents scoring strictly above this are considered reliable
# self-published disclosures; everything else is third-party grade.
RELIABILITY_THRESHOLD = 0.6


class Origin(str, Enum):
    EXTRACTED = "extracted"
    PREDICTED = "predicted"
    MANUAL = "manual"


class Review(str, Enum):
    UNREVIEWED = "unreviewed"
    CONFIRMED = "confirmed"
    REJECTED = "rejected"


class ContentType(str, Enum):
    PDF = "pdf"
    HTML = "html"
    PLAIN = "plain"


class MetadataSource(str, Enum):
    SEED = "seed"
    KNOWLEDGE_BASE = "knowledge_base"
    MANUAL = "manual"


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class Company:
    """A registry node: identity plus the metadata used for analytics.

    The id is a deterministic slug of the canonical legal name (or supplied
    explicitly, e.g. from a seed CSV). Optional fields stay None until a
    seed row, a knowledge-base patch, or a manual edit fills them.
    """

    id: str
    legal_name: str
    aliases: set[str] = field(default_factory=set)
    market_cap_usd: Optional[float] = None
    industry: Optional[str] = None
    country: Optional[str] = None
    continent: Optional[str] = None
    website_domain: Optional[str] = None
    contact_email: Optional[str] = None
    employee_count: Optional[int] = None
    revenue_usd: Optional[float] = None
    metadata_source: MetadataSource = MetadataSource.SEED

    def __post_init__(self):
        if not self.legal_name or not self.legal_name.strip():
            raise InvalidRecordError("legal_name must be nonempty")
        if not self.id:
            raise InvalidRecordError("company id must be nonempty")
        self.aliases = {a for a in self.aliases if a}
        if self.continent is not None and self.continent not in CONTINENTS:
            raise InvalidRecordError(
                f"continent {self.continent!r} not one of {CONTINENTS}")
        if self.market_cap_usd is not None and self.market_cap_usd < 0:
            raise InvalidRecordError("market_cap_usd must be >= 0")
        if self.employee_count is not None and self.employee_count < 0:
            raise InvalidRecordError("employee_count must be >= 0")
        if self.revenue_usd is not None and self.revenue_usd < 0:
            raise InvalidRecordError("revenue_usd must be >= 0")

    @classmethod
    def from_name(cls, legal_name: str, **kwargs) -> "Company":
        """Build a company with the id derived from the canonical name."""
        return cls(id=company_id_for(legal_name), legal_name=legal_name, **kwargs)


@dataclass(frozen=True)
class SourceDocument:
    """A fetched disclosure document with its reliability score."""

    url: str
    retrieved_at: datetime
    content_hash: str
    content_type: ContentType
    score: float
    extractor_id: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise InvalidRecordError(f"score {self.score} outside [0, 1]")
        if len(self.content_hash) != 64:
            raise InvalidRecordError("content_hash must be a 64-hex digest")

    @property
    def reliable(self) -> bool:
        return self.score > RELIABILITY_THRESHOLD


@dataclass
class AuditEntry:
    actor: str
    verdict: Review
    timestamp: datetime


@dataclass
class SupplierRelation:
    """A directed customer -> supplier edge, keyed by (customer, supplier, origin).

    Extracted relations carry their provenance documents and a confidence
    equal to the best provenance score; predicted ones stay at or below the
    reliability threshold; manual ones are asserted at 1.0.
    """

    customer: str
    supplier: str
    origin: Origin
    review: Review = Review.UNREVIEWED
    confidence: float = 0.0
    provenance: list[SourceDocument] = field(default_factory=list)
    audit: list[AuditEntry] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.customer, self.supplier, self.origin.value)


@dataclass
class GraphSnapshot:
    """Canonical in-memory view of a graph: sorted companies and relations."""

    companies: list[Company]
    relations: list[SupplierRelation]
    schema_version: int
