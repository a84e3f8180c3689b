"""The automated collection pipeline: seed registry to extracted relations.

Nine in-process stages per company (queries, search, fetch, extract,
score, recognize, validate, upsert, plus the final snapshot write) talk to
each other only through the intermediate store, mirroring a microservice
decomposition without network deployment. Completed stages are skipped on
re-runs, and replaying recorded upserts is idempotent, so at-least-once
execution yields exactly-once effects and kill/resume is safe at every
stage boundary.
"""

from __future__ import annotations

import base64
import csv
import hashlib
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

from .clients import CandidateMention, SearchHit, SearchQuery
from .errors import (
    ExtractionFailedError,
    SeedFormatError,
    SupplierGraphError,
)
from .extract import PdfExtractor, extract_text
from .graph import SupplierGraph
from .matching import CompanyIndex, DEFAULT_MATCH_THRESHOLD, company_id_for, match_registry
from .model import Company, ContentType, Origin, SourceDocument
from .scoring import score_document
from .store import IntermediateStore, Stage

logger = logging.getLogger(__name__)

QUERY_TEMPLATES = (
    '"{name}" supplier list',
    '"{name}" suppliers',
    '"{name}" supply chain disclosure',
)

SEED_COLUMNS = ("id", "name", "ticker", "market_cap_usd", "industry",
                "country", "continent", "website", "email")


@dataclass
class SeedLoadResult:
    graph: SupplierGraph
    rows: int
    merged: int


def load_seed_registry(csv_path: str | Path, graph: Optional[SupplierGraph] = None) -> SeedLoadResult:
    """Load the seed company CSV into a registry.

    Rows whose names share a canonical form merge into one company. The
    ticker column is accepted for compatibility with registry exports but
    not stored. Malformed rows raise SeedFormatError with row/column
    context.
    """
    csv_path = Path(csv_path)
    graph = graph or SupplierGraph()
    with csv_path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise SeedFormatError(f"{csv_path}: file is empty")
        missing = [c for c in SEED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SeedFormatError(f"{csv_path}: missing columns {missing}")
        rows = 0
        merged = 0
        for lineno, row in enumerate(reader, start=2):
            name = (row.get("name") or "").strip()
            if not name:
                raise SeedFormatError(f"{csv_path}: row {lineno}: empty name")
            company_id = (row.get("id") or "").strip() or company_id_for(name)
            market_cap = _parse_number(row.get("market_cap_usd"), csv_path, lineno, "market_cap_usd")
            continent = (row.get("continent") or "").strip() or None
            record = Company(
                id=company_id,
                legal_name=name,
                market_cap_usd=market_cap,
                industry=(row.get("industry") or "").strip() or None,
                country=(row.get("country") or "").strip() or None,
                continent=continent,
                website_domain=(row.get("website") or "").strip() or None,
                contact_email=(row.get("email") or "").strip() or None,
            )
            if graph.has_company(company_id):
                merged += 1
            graph.upsert_company(record)
            rows += 1
    return SeedLoadResult(graph=graph, rows=rows, merged=merged)


def _parse_number(raw: Optional[str], path: Path, lineno: int, column: str) -> Optional[float]:
    raw = (raw or "").strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise SeedFormatError(f"{path}: row {lineno}, column {column}: not a number: {raw!r}") from None


def build_queries(company: Company) -> list[SearchQuery]:
    """Deterministic search queries for one company, in rank order."""
    return [
        SearchQuery(company=company.id, text=template.format(name=company.legal_name), rank=rank)
        for rank, template in enumerate(QUERY_TEMPLATES)
    ]


@dataclass
class ValidationResult:
    supplier_ids: list[str]
    matched: int
    dropped: int


def validate_mentions(
    mentions: list[CandidateMention],
    index: CompanyIndex,
    focal_company: str,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> ValidationResult:
    """Keep only mentions that fuzzy-match the registry.

    Unmatched mentions are dropped (the recognizer hallucination filter),
    duplicates collapse to one id, and the focal company never appears in
    its own supplier list.
    """
    supplier_ids: list[str] = []
    matched = 0
    dropped = 0
    for mention in mentions:
        result = match_registry(mention.raw_name, index, threshold)
        if result is None:
            dropped += 1
            continue
        matched += 1
        if result.candidate != focal_company and result.candidate not in supplier_ids:
            supplier_ids.append(result.candidate)
    return ValidationResult(supplier_ids=supplier_ids, matched=matched, dropped=dropped)


@dataclass
class PipelineReport:
    companies_processed: int = 0
    companies_with_relations: int = 0
    relations_upserted: int = 0
    documents_fetched: int = 0
    documents_reliable: int = 0
    mentions_seen: int = 0
    mentions_matched: int = 0
    stages_executed: int = 0
    stages_skipped: int = 0
    per_company: dict[str, dict[str, str]] = field(default_factory=dict)

    @property
    def all_stages_skipped(self) -> bool:
        return self.stages_executed == 0

    def summary_line(self) -> str:
        return (
            f"{self.companies_processed} companies processed, "
            f"{self.companies_with_relations} with supplier relations; "
            f"{self.relations_upserted} relations from "
            f"{self.documents_reliable} reliable files"
        )

    def to_dict(self) -> dict:
        return {
            "companies_processed": self.companies_processed,
            "companies_with_relations": self.companies_with_relations,
            "relations_upserted": self.relations_upserted,
            "documents_fetched": self.documents_fetched,
            "documents_reliable": self.documents_reliable,
            "mentions_seen": self.mentions_seen,
            "mentions_matched": self.mentions_matched,
            "stages_executed": self.stages_executed,
            "stages_skipped": self.stages_skipped,
            "per_company": self.per_company,
        }


# Callback invoked after every completed stage boundary; tests use it to
# kill the run at arbitrary points. The final snapshot boundary reports
# company=None, stage="finalize".
AfterStage = Callable[[Optional[str], str], None]


class PipelineRun:
    def __init__(
        self,
        graph: SupplierGraph,
        store: IntermediateStore,
        search_client,
        fetcher,
        recognizer,
        *,
        max_results: int = 5,
        matcher_threshold: float = DEFAULT_MATCH_THRESHOLD,
        pdf_extractor: Optional[PdfExtractor] = None,
        force: bool = False,
        after_stage: Optional[AfterStage] = None,
    ):
        self.graph = graph
        self.store = store
        self.search_client = search_client
        self.fetcher = fetcher
        self.recognizer = recognizer
        self.max_results = max_results
        self.matcher_threshold = matcher_threshold
        self.pdf_extractor = pdf_extractor
        self.force = force
        self.after_stage = after_stage
        self.report = PipelineReport()
        self.index = graph.match_index()

    # -- stage plumbing --------------------------------------------------

    def _ensure(self, company_id: str, stage: Stage, compute: Callable[[], object]):
        if not self.force and self.store.is_done(company_id, stage):
            payload = self.store.read(company_id, stage)
            self.report.stages_skipped += 1
        else:
            payload = compute()
            self.store.write(company_id, stage, payload)
            self.report.stages_executed += 1
        if self.after_stage is not None:
            self.after_stage(company_id, stage.value)
        return payload

    # -- per-company stages ----------------------------------------------

    def _run_company(self, company: Company) -> None:
        cid = company.id
        queries_payload = self._ensure(cid, Stage.QUERIES, lambda: [
            {"company": q.company, "text": q.text, "rank": q.rank}
            for q in build_queries(company)
        ])

        def compute_search():
            hits: list[dict] = []
            seen_urls: set[str] = set()
            for q in queries_payload:
                query = SearchQuery(company=q["company"], text=q["text"], rank=q["rank"])
                for hit in self.search_client.search(query, max_results=self.max_results):
                    if hit.url not in seen_urls:
                        seen_urls.add(hit.url)
                        hits.append({"url": hit.url, "title": hit.title, "query_rank": q["rank"]})
            return hits

        search_payload = self._ensure(cid, Stage.SEARCH, compute_search)

        def compute_fetch():
            docs: list[dict] = []
            for item in search_payload:
                hit = SearchHit(
                    query=SearchQuery(company=cid, text="", rank=item["query_rank"]),
                    url=item["url"], title=item.get("title"))
                try:
                    raw = self.fetcher.fetch(hit)
                except SupplierGraphError as exc:
                    logger.warning("fetch failed for %s: %s", item["url"], exc)
                    docs.append({"url": item["url"], "error": str(exc)})
                    continue
                docs.append({
                    "url": raw.url,
                    "content_type": raw.content_type.value,
                    "fetched_at": raw.fetched_at.isoformat(),
                    "content_hash": hashlib.sha256(raw.payload).hexdigest(),
                    "payload_b64": base64.b64encode(raw.payload).decode("ascii"),
                    "origin_path": raw.origin_path,
                })
            return docs

        fetch_payload = self._ensure(cid, Stage.FETCH, compute_fetch)
        fetched_docs = [d for d in fetch_payload if "error" not in d]
        self.report.documents_fetched += len(fetched_docs)

        def compute_extract():
            records = []
            for doc in fetched_docs:
                payload = base64.b64decode(doc["payload_b64"])
                try:
                    text = extract_text(
                        payload,
                        ContentType(doc["content_type"]),
                        origin_path=doc.get("origin_path"),
                        pdf_extractor=self.pdf_extractor,
                    )
                    failed = False
                except ExtractionFailedError as exc:
                    logger.warning("extraction failed for %s: %s", doc["url"], exc)
                    text = ""
                    failed = True
                records.append({"url": doc["url"], "text": text, "failed": failed})
            return records

        extract_payload = self._ensure(cid, Stage.EXTRACT, compute_extract)
        texts = {r["url"]: r["text"] for r in extract_payload}

        def compute_score():
            records = []
            for doc in fetched_docs:
                breakdown = score_document(company.legal_name, doc["url"], texts.get(doc["url"], ""))
                records.append({
                    "url": doc["url"],
                    "retrieved_at": doc["fetched_at"],
                    "content_hash": doc["content_hash"],
                    "content_type": doc["content_type"],
                    "score": breakdown.score,
                    "name_in_url": breakdown.name_in_url,
                    "name_in_text": breakdown.name_in_text,
                    "keyword_in_text": breakdown.keyword_in_text,
                    "extractor_id": _extractor_id(doc, texts.get(doc["url"], "")),
                })
            return records

        score_payload = self._ensure(cid, Stage.SCORE, compute_score)
        reliable_docs = [r for r in score_payload if r["score"] > 0.6]
        self.report.documents_reliable += len(reliable_docs)

        def compute_recognize():
            records = []
            for doc in reliable_docs:
                mentions = self.recognizer.recognize(texts.get(doc["url"], ""))
                records.append({"url": doc["url"], "mentions": [m.raw_name for m in mentions]})
            return records

        recognize_payload = self._ensure(cid, Stage.RECOGNIZE, compute_recognize)
        self.report.mentions_seen += sum(len(r["mentions"]) for r in recognize_payload)

        def compute_validate():
            records = []
            for doc in recognize_payload:
                mentions = [CandidateMention(raw_name=n, recognizer_id="replay")
                            for n in doc["mentions"]]
                result = validate_mentions(mentions, self.index, cid, self.matcher_threshold)
                records.append({
                    "url": doc["url"],
                    "supplier_ids": result.supplier_ids,
                    "matched": result.matched,
                    "dropped": result.dropped,
                })
            return records

        validate_payload = self._ensure(cid, Stage.VALIDATE, compute_validate)
        self.report.mentions_matched += sum(r["matched"] for r in validate_payload)

        def compute_upsert():
            pairs = []
            for doc in validate_payload:
                for supplier_id in doc["supplier_ids"]:
                    pairs.append({"supplier": supplier_id, "url": doc["url"]})
            return pairs

        upsert_payload = self._ensure(cid, Stage.UPSERT, compute_upsert)

        # Applying recorded upserts happens on every run (idempotent), so a
        # resumed run reconstructs the same graph even when the snapshot was
        # never written.
        score_by_url = {r["url"]: r for r in score_payload}
        suppliers_touched: set[str] = set()
        for pair in upsert_payload:
            record = score_by_url[pair["url"]]
            document = SourceDocument(
                url=record["url"],
                retrieved_at=datetime.fromisoformat(record["retrieved_at"]),
                content_hash=record["content_hash"],
                content_type=ContentType(record["content_type"]),
                score=record["score"],
                extractor_id=record["extractor_id"],
            )
            self.graph.upsert_relation(cid, pair["supplier"], Origin.EXTRACTED, provenance=document)
            suppliers_touched.add(pair["supplier"])
        self.report.relations_upserted += len(suppliers_touched)
        if suppliers_touched:
            self.report.companies_with_relations += 1

    # -- run -------------------------------------------------------------

    def run(self, snapshot_path: Optional[str | Path] = None) -> PipelineReport:
        for company in self.graph.companies():
            cid = company.id
            try:
                self._run_company(company)
            except SupplierGraphError as exc:
                logger.error("pipeline failed for %s: %s", cid, exc)
                self.store.mark_failed(cid, _next_stage(self.store, cid), str(exc))
            self.report.companies_processed += 1
            self.report.per_company[cid] = self.store.statuses(cid)

        if self.after_stage is not None:
            self.after_stage(None, "finalize")
        if snapshot_path is not None:
            self.graph.save_snapshot(snapshot_path)
        return self.report


def _extractor_id(doc: dict, text: str) -> str:
    content_type = doc["content_type"]
    if content_type == "pdf":
        sidecar = Path(str(doc.get("origin_path")) + ".txt") if doc.get("origin_path") else None
        if sidecar is not None and sidecar.exists():
            return "pdf-sidecar"
        return "pdf" if text else "none"
    return content_type


def _next_stage(store: IntermediateStore, company_id: str) -> Stage:
    for stage in Stage:
        if not store.is_done(company_id, stage):
            return stage
    return Stage.UPSERT


def run_pipeline(
    graph: SupplierGraph,
    store: IntermediateStore,
    search_client,
    fetcher,
    recognizer,
    *,
    max_results: int = 5,
    matcher_threshold: float = DEFAULT_MATCH_THRESHOLD,
    pdf_extractor: Optional[PdfExtractor] = None,
    snapshot_path: Optional[str | Path] = None,
    force: bool = False,
    after_stage: Optional[AfterStage] = None,
) -> PipelineReport:
    """Run all stages for every registry company and write the snapshot.

    Per-company failures are recorded in the store and the report; they do
    not abort the run. Stages already marked done are skipped (resume)
    unless force is set.
    """
    run = PipelineRun(
        graph, store, search_client, fetcher, recognizer,
        max_results=max_results,
        matcher_threshold=matcher_threshold,
        pdf_extractor=pdf_extractor,
        force=force,
        after_stage=after_stage,
    )
    return run.run(snapshot_path=snapshot_path)
