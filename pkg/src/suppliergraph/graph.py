"""Persistent supplier-relation graph with provenance-aware upserts.

The graph holds the company registry and the directed customer->supplier
edges. All mutations are idempotent and funneled through a single writer
lock; reads may proceed concurrently. Persistence is a single-file,
line-oriented snapshot in canonical order, so equal graphs always produce
byte-identical files.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime
from pathlib import Path
from typing import Optional

from .errors import (
    InvalidRecordError,
    InvalidVerdictError,
    SelfSupplyError,
    SnapshotFormatError,
    SnapshotVersionError,
    UnknownCompanyError,
    UnknownRelationError,
)
from .matching import CompanyIndex
from .model import (
    AuditEntry,
    Company,
    ContentType,
    GraphSnapshot,
    MetadataSource,
    Origin,
    Review,
    SourceDocument,
    SupplierRelation,
    utc_now,
)

SCHEMA_VERSION = 1

# Company fields that merge by fill-if-absent on re-upsert.
_FILLABLE_FIELDS = (
    "market_cap_usd", "industry", "country", "continent",
    "website_domain", "contact_email", "employee_count", "revenue_usd",
)


class SupplierGraph:
    """Company registry plus relation store, keyed by (customer, supplier, origin)."""

    def __init__(self):
        self._companies: dict[str, Company] = {}
        self._relations: dict[tuple[str, str, str], "SupplierRelation"] = {}
        self._lock = threading.RLock()

    # -- registry -------------------------------------------------------

    def upsert_company(self, record: Company) -> str:
        """Insert or merge a company; returns its stable id.

        Merging unions aliases and fills absent optional fields; values
        already present are never overwritten, so pipeline re-runs cannot
        destroy manual enrichment.
        """
        with self._lock:
            existing = self._companies.get(record.id)
            if existing is None:
                self._companies[record.id] = record
                return record.id
            existing.aliases |= record.aliases
            if record.legal_name != existing.legal_name:
                existing.aliases.add(record.legal_name)
            for name in _FILLABLE_FIELDS:
                if getattr(existing, name) is None:
                    value = getattr(record, name)
                    if value is not None:
                        setattr(existing, name, value)
            return existing.id

    def fill_company_fields(self, company_id: str, **fields) -> Company:
        """Fill absent optional fields on a company; present values win."""
        company = self.company(company_id)
        with self._lock:
            for name, value in fields.items():
                if name not in _FILLABLE_FIELDS:
                    raise InvalidRecordError(f"field {name!r} is not patchable")
                if value is not None and getattr(company, name) is None:
                    setattr(company, name, value)
        return company

    def company(self, company_id: str) -> Company:
        try:
            return self._companies[company_id]
        except KeyError:
            raise UnknownCompanyError(company_id) from None

    def has_company(self, company_id: str) -> bool:
        return company_id in self._companies

    def companies(self) -> list[Company]:
        return [self._companies[cid] for cid in sorted(self._companies)]

    def __len__(self) -> int:
        return len(self._companies)

    def match_index(self) -> CompanyIndex:
        """Matching view over legal names and aliases of all companies."""
        index = CompanyIndex()
        for company in self._companies.values():
            index.add(company.id, [company.legal_name, *company.aliases])
        return index

    # -- relations ------------------------------------------------------

    def upsert_relation(
        self,
        customer: str,
        supplier: str,
        origin: Origin,
        provenance: Optional[SourceDocument] = None,
        confidence: Optional[float] = None,
    ) -> "SupplierRelation":
        """Insert or merge an edge.

        Extracted edges require a provenance document; re-upserting with an
        already-recorded URL is a no-op, and a new URL appends to provenance
        and recomputes confidence as the max score. Predicted edges require
        an explicit confidence <= the reliability threshold; manual edges
        are pinned at 1.0. Review state and audit history survive upserts.
        """
        if customer == supplier:
            raise SelfSupplyError(f"{customer} cannot supply itself")
        if not self.has_company(customer):
            raise UnknownCompanyError(customer)
        if not self.has_company(supplier):
            raise UnknownCompanyError(supplier)
        origin = Origin(origin)

        with self._lock:
            key = (customer, supplier, origin.value)
            relation = self._relations.get(key)

            if origin is Origin.EXTRACTED:
                if provenance is None:
                    raise InvalidRecordError("extracted relation needs a provenance document")
                if relation is None:
                    relation = SupplierRelation(
                        customer=customer, supplier=supplier, origin=origin,
                        confidence=provenance.score, provenance=[provenance])
                    self._relations[key] = relation
                elif all(doc.url != provenance.url for doc in relation.provenance):
                    relation.provenance.append(provenance)
                    relation.provenance.sort(key=lambda doc: doc.url)
                    relation.confidence = max(doc.score for doc in relation.provenance)
            elif origin is Origin.PREDICTED:
                if confidence is None or not 0.0 < confidence <= 0.6:
                    raise InvalidRecordError(
                        f"predicted relation needs confidence in (0, 0.6], got {confidence}")
                if relation is None:
                    relation = SupplierRelation(
                        customer=customer, supplier=supplier, origin=origin,
                        confidence=confidence)
                    self._relations[key] = relation
                else:
                    relation.confidence = confidence
            else:  # manual
                if relation is None:
                    relation = SupplierRelation(
                        customer=customer, supplier=supplier, origin=origin,
                        confidence=1.0)
                    self._relations[key] = relation
            return relation

    def relation(self, customer: str, supplier: str, origin: Origin | str) -> "SupplierRelation":
        key = (customer, supplier, Origin(origin).value)
        try:
            return self._relations[key]
        except KeyError:
            raise UnknownRelationError(str(key)) from None

    def has_relation(self, customer: str, supplier: str, origin: Origin | str) -> bool:
        return (customer, supplier, Origin(origin).value) in self._relations

    def relations(self) -> list["SupplierRelation"]:
        return [self._relations[k] for k in sorted(self._relations)]

    def set_review(
        self,
        customer: str,
        supplier: str,
        origin: Origin | str,
        verdict: Review | str,
        actor: str,
        timestamp: Optional[datetime] = None,
    ) -> "SupplierRelation":
        """Apply a confirm/reject verdict; the latest verdict wins.

        Every accepted call appends one audit entry with the acting company
        and timestamp.
        """
        try:
            verdict = Review(verdict)
        except ValueError:
            raise InvalidVerdictError(str(verdict)) from None
        if verdict not in (Review.CONFIRMED, Review.REJECTED):
            raise InvalidVerdictError(verdict.value)
        relation = self.relation(customer, supplier, origin)
        with self._lock:
            relation.review = verdict
            relation.audit.append(AuditEntry(
                actor=actor, verdict=verdict,
                timestamp=timestamp or utc_now()))
        return relation

    def suppliers_of(
        self,
        company_id: str,
        origin: Optional[Origin | str] = None,
        include_rejected: bool = False,
    ) -> list["SupplierRelation"]:
        """Relations where the company is the customer, sorted by (origin, supplier).

        Rejected relations are excluded unless asked for: review exists to
        remove bad edges from default views.
        """
        self.company(company_id)
        wanted = Origin(origin).value if origin is not None else None
        rows = [
            rel for rel in self._relations.values()
            if rel.customer == company_id
            and (wanted is None or rel.origin.value == wanted)
            and (include_rejected or rel.review is not Review.REJECTED)
        ]
        rows.sort(key=lambda rel: (rel.origin.value, rel.supplier))
        return rows

    def customers_of(self, company_id: str, include_rejected: bool = False) -> list["SupplierRelation"]:
        self.company(company_id)
        rows = [
            rel for rel in self._relations.values()
            if rel.supplier == company_id
            and (include_rejected or rel.review is not Review.REJECTED)
        ]
        rows.sort(key=lambda rel: (rel.origin.value, rel.customer))
        return rows

    # -- persistence ----------------------------------------------------

    def snapshot(self) -> GraphSnapshot:
        return GraphSnapshot(
            companies=self.companies(),
            relations=self.relations(),
            schema_version=SCHEMA_VERSION,
        )

    def snapshot_bytes(self) -> bytes:
        """Canonical single-file form: header line plus one record per line."""
        lines = [_dump({"schema_version": SCHEMA_VERSION})]
        snap = self.snapshot()
        for company in snap.companies:
            lines.append(_dump(_company_record(company)))
        for relation in snap.relations:
            lines.append(_dump(_relation_record(relation)))
        return ("\n".join(lines) + "\n").encode("utf-8")

    def save_snapshot(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.snapshot_bytes())
        tmp.replace(path)

    def equal_content(self, other: "SupplierGraph") -> bool:
        return self.snapshot_bytes() == other.snapshot_bytes()


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _company_record(company: Company) -> dict:
    record = {
        "kind": "company",
        "id": company.id,
        "legal_name": company.legal_name,
        "aliases": sorted(company.aliases),
        "metadata_source": company.metadata_source.value,
    }
    for name in _FILLABLE_FIELDS:
        value = getattr(company, name)
        if value is not None:
            record[name] = value
    return record


def _relation_record(relation: SupplierRelation) -> dict:
    return {
        "kind": "relation",
        "customer": relation.customer,
        "supplier": relation.supplier,
        "origin": relation.origin.value,
        "review": relation.review.value,
        "confidence": relation.confidence,
        "provenance": [
            {
                "url": doc.url,
                "retrieved_at": doc.retrieved_at.isoformat(),
                "content_hash": doc.content_hash,
                "content_type": doc.content_type.value,
                "score": doc.score,
                "extractor_id": doc.extractor_id,
            }
            for doc in relation.provenance
        ],
        "audit": [
            {
                "actor": entry.actor,
                "verdict": entry.verdict.value,
                "timestamp": entry.timestamp.isoformat(),
            }
            for entry in relation.audit
        ],
    }


def _company_from_record(record: dict) -> Company:
    return Company(
        id=record["id"],
        legal_name=record["legal_name"],
        aliases=set(record.get("aliases", [])),
        metadata_source=MetadataSource(record.get("metadata_source", "seed")),
        **{name: record.get(name) for name in _FILLABLE_FIELDS},
    )


def _relation_from_record(record: dict) -> SupplierRelation:
    provenance = [
        SourceDocument(
            url=doc["url"],
            retrieved_at=datetime.fromisoformat(doc["retrieved_at"]),
            content_hash=doc["content_hash"],
            content_type=ContentType(doc["content_type"]),
            score=doc["score"],
            extractor_id=doc["extractor_id"],
        )
        for doc in record.get("provenance", [])
    ]
    audit = [
        AuditEntry(
            actor=entry["actor"],
            verdict=Review(entry["verdict"]),
            timestamp=datetime.fromisoformat(entry["timestamp"]),
        )
        for entry in record.get("audit", [])
    ]
    return SupplierRelation(
        customer=record["customer"],
        supplier=record["supplier"],
        origin=Origin(record["origin"]),
        review=Review(record["review"]),
        confidence=record["confidence"],
        provenance=provenance,
        audit=audit,
    )


def load_snapshot(path: str | Path) -> SupplierGraph:
    """Load a snapshot file, validating schema version and referential integrity."""
    lines = Path(path).read_bytes().decode("utf-8").splitlines()
    if not lines:
        raise SnapshotFormatError(f"{path}: empty snapshot file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"{path}: bad header line: {exc}") from exc
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SnapshotVersionError(
            f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")

    graph = SupplierGraph()
    pending: list[SupplierRelation] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnapshotFormatError(f"{path}:{lineno}: {exc}") from exc
        kind = record.get("kind")
        if kind == "company":
            graph._companies[record["id"]] = _company_from_record(record)
        elif kind == "relation":
            pending.append(_relation_from_record(record))
        else:
            raise SnapshotFormatError(f"{path}:{lineno}: unknown record kind {kind!r}")

    for relation in pending:
        for endpoint in (relation.customer, relation.supplier):
            if not graph.has_company(endpoint):
                raise SnapshotFormatError(
                    f"{path}: relation references unknown company {endpoint!r}")
        graph._relations[relation.key] = relation
    return graph
