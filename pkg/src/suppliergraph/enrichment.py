"""Company metadata enrichment from a knowledge base.

Patches fill industry, location, contact, and size attributes used by the
analytics and prediction layers. Applying a patch never overwrites a value
that is already set, so manual edits always survive enrichment runs.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import requests

from .errors import AmbiguousEntityError, ClientUnavailableError
from .graph import SupplierGraph
from .model import Company

logger = logging.getLogger(__name__)


@dataclass
class MetadataPatch:
    company: str
    industry: Optional[str] = None
    country: Optional[str] = None
    continent: Optional[str] = None
    contact_email: Optional[str] = None
    employee_count: Optional[int] = None
    revenue_usd: Optional[float] = None
    source: str = "knowledge_base"

    _VALUE_FIELDS = ("industry", "country", "continent", "contact_email",
                     "employee_count", "revenue_usd")

    def present_fields(self) -> dict:
        return {
            name: getattr(self, name)
            for name in self._VALUE_FIELDS
            if getattr(self, name) is not None
        }

    def __bool__(self) -> bool:
        return bool(self.present_fields())


class FixtureMetadataClient:
    """Lookup against a local CSV table keyed by company id.

    Columns: company_id,industry,country,continent,email,employee_count,revenue_usd
    """

    def __init__(self, csv_path: str | Path):
        self._rows: dict[str, list[dict]] = {}
        with Path(csv_path).open(newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                self._rows.setdefault(row["company_id"].strip(), []).append(row)

    def lookup(self, company: Company) -> Optional[MetadataPatch]:
        rows = self._rows.get(company.id, [])
        if not rows:
            return None
        if len(rows) > 1:
            raise AmbiguousEntityError(f"{company.id}: {len(rows)} fixture rows")
        row = rows[0]
        return MetadataPatch(
            company=company.id,
            industry=row.get("industry", "").strip() or None,
            country=row.get("country", "").strip() or None,
            continent=row.get("continent", "").strip() or None,
            contact_email=row.get("email", "").strip() or None,
            employee_count=int(row["employee_count"]) if row.get("employee_count", "").strip() else None,
            revenue_usd=float(row["revenue_usd"]) if row.get("revenue_usd", "").strip() else None,
            source="fixture",
        )


class RemoteKnowledgeBaseClient:
    """Knowledge-base lookup by company label.

    The endpoint and the attribute mapping are configuration: `config`
    holds `search_url` (expects ?q=<label>, returns {"matches": [...]}),
    and `attributes`, a map of patch field -> key in the match payload.
    More than one match is ambiguous and yields no patch.
    """

    def __init__(self, config: dict, timeout: float = 20.0):
        self.search_url = config.get("search_url")
        self.attributes = config.get("attributes", {})
        self.timeout = timeout

    def lookup(self, company: Company) -> Optional[MetadataPatch]:
        if not self.search_url:
            raise ClientUnavailableError("knowledge-base search_url not configured")
        try:
            response = requests.get(self.search_url, params={"q": company.legal_name},
                                    timeout=self.timeout)
            response.raise_for_status()
            matches = response.json().get("matches", [])
        except requests.RequestException as exc:
            raise ClientUnavailableError(f"knowledge-base lookup failed: {exc}") from exc
        if not matches:
            return None
        if len(matches) > 1:
            raise AmbiguousEntityError(f"{company.legal_name}: {len(matches)} candidates")
        payload = matches[0]
        values = {field: payload.get(key) for field, key in self.attributes.items()}
        return MetadataPatch(company=company.id, source="knowledge_base", **values)


def enrich_company(company: Company, client) -> Optional[MetadataPatch]:
    """Look the company up; an ambiguous entity is recorded, not applied."""
    try:
        patch = client.lookup(company)
    except AmbiguousEntityError as exc:
        logger.warning("enrichment skipped: %s", exc)
        return None
    if patch is None or not patch:
        return None
    return patch


def apply_patch(graph: SupplierGraph, patch: MetadataPatch) -> Company:
    """Fill absent fields from the patch; present values always win."""
    return graph.fill_company_fields(patch.company, **patch.present_fields())
