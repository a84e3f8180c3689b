"""HTTP JSON API for the collaborative platform.

Public reads expose the company graph and analytics; every mutation
requires a bearer token obtained through the claim/verify flow and bound
to an involved company. Outbound notifications are appended to a
persisted outbox; SMTP delivery is an optional adapter on top of it.
"""

from __future__ import annotations

import json
import re
import secrets
import smtplib
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from email.message import EmailMessage
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics
from .errors import (
    InvalidRecordError,
    InvalidVerdictError,
    MissingMetadataError,
    SelfSupplyError,
    UnknownCompanyError,
    UnknownRelationError,
)
from .graph import SupplierGraph
from .matching import DEFAULT_MATCH_THRESHOLD, company_id_for, match_registry
from .model import Company, MetadataSource, Origin, utc_now
from .prediction import predict_suppliers

CLAIM_TTL = timedelta(hours=24)
EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


# -- collaboration state ----------------------------------------------------


@dataclass
class RepresentativeClaim:
    company: str
    email: str
    code: str
    created_at: datetime
    verified: bool = False

    def expired(self, now: datetime) -> bool:
        return now - self.created_at > CLAIM_TTL


@dataclass
class ApiToken:
    token: str
    company: str
    issued_at: datetime


@dataclass
class OutboxEntry:
    to: str
    subject: str
    body: str
    cause: str  # added_as_supplier | verification
    created_at: datetime
    delivered: bool = False

    def to_dict(self) -> dict:
        return {
            "to": self.to,
            "subject": self.subject,
            "body": self.body,
            "cause": self.cause,
            "created_at": self.created_at.isoformat(),
            "delivered": self.delivered,
        }


@dataclass
class ServiceConfig:
    snapshot_path: Optional[Path] = None
    state_path: Optional[Path] = None
    matcher_threshold: float = DEFAULT_MATCH_THRESHOLD
    expose_outbox: bool = False
    page_size: int = 50
    smtp: Optional[dict] = None
    static_dir: Optional[Path] = None  # serve the built web UI from here


class ServiceState:
    """Claims, tokens, outbox, and notification dedup, with file persistence.

    Mutations take the state lock; the graph itself serializes writes
    through its own single-writer lock.
    """

    def __init__(self, graph: SupplierGraph, config: ServiceConfig):
        self.graph = graph
        self.config = config
        self.claims: dict[str, RepresentativeClaim] = {}
        self.tokens: dict[str, ApiToken] = {}
        self.outbox: list[OutboxEntry] = []
        self.notified: set[tuple[str, str, str]] = set()
        self.lock = threading.RLock()
        if config.state_path and Path(config.state_path).exists():
            self._load(Path(config.state_path))

    # persistence ---------------------------------------------------------

    def _load(self, path: Path) -> None:
        data = json.loads(path.read_text(encoding="utf-8"))
        for item in data.get("claims", []):
            claim = RepresentativeClaim(
                company=item["company"], email=item["email"], code=item["code"],
                created_at=datetime.fromisoformat(item["created_at"]),
                verified=item["verified"])
            self.claims[claim.code] = claim
        for item in data.get("tokens", []):
            token = ApiToken(token=item["token"], company=item["company"],
                             issued_at=datetime.fromisoformat(item["issued_at"]))
            self.tokens[token.token] = token
        for item in data.get("outbox", []):
            self.outbox.append(OutboxEntry(
                to=item["to"], subject=item["subject"], body=item["body"],
                cause=item["cause"],
                created_at=datetime.fromisoformat(item["created_at"]),
                delivered=item["delivered"]))
        self.notified = {tuple(key) for key in data.get("notified", [])}

    def persist(self) -> None:
        if self.config.state_path is None:
            return
        path = Path(self.config.state_path)
        payload = {
            "claims": [
                {"company": c.company, "email": c.email, "code": c.code,
                 "created_at": c.created_at.isoformat(), "verified": c.verified}
                for c in self.claims.values()
            ],
            "tokens": [
                {"token": t.token, "company": t.company, "issued_at": t.issued_at.isoformat()}
                for t in self.tokens.values()
            ],
            "outbox": [entry.to_dict() for entry in self.outbox],
            "notified": [list(key) for key in sorted(self.notified)],
        }
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        tmp.replace(path)

    def persist_graph(self) -> None:
        if self.config.snapshot_path is not None:
            self.graph.save_snapshot(self.config.snapshot_path)

    # auth ----------------------------------------------------------------

    def create_claim(self, company_id: str, email: str) -> RepresentativeClaim:
        company = self.graph.company(company_id)
        if company.website_domain:
            domain = email.rsplit("@", 1)[-1].lower()
            if domain != company.website_domain.lower():
                raise ApiError(403, "domain-mismatch",
                               f"email domain must be {company.website_domain}")
        with self.lock:
            claim = RepresentativeClaim(
                company=company_id, email=email,
                code=secrets.token_urlsafe(16), created_at=utc_now())
            self.claims[claim.code] = claim
            self.outbox.append(OutboxEntry(
                to=email,
                subject=f"Verify your representative claim for {company.legal_name}",
                body=(f"Use this code to verify that you represent "
                      f"{company.legal_name}: {claim.code}"),
                cause="verification",
                created_at=utc_now()))
            self.persist()
        return claim

    def verify_claim(self, code: str) -> ApiToken:
        with self.lock:
            claim = self.claims.get(code)
            if claim is None or claim.verified:
                raise ApiError(404, "unknown-code", "verification code not found")
            if claim.expired(utc_now()):
                raise ApiError(410, "expired-code", "verification code expired")
            claim.verified = True   # single use
            token = ApiToken(token=secrets.token_urlsafe(32), company=claim.company,
                             issued_at=utc_now())
            self.tokens[token.token] = token
            self.persist()
        return token

    def revoke_token(self, token: str) -> None:
        with self.lock:
            self.tokens.pop(token, None)
            self.persist()

    def company_for_token(self, token: Optional[str]) -> str:
        if not token:
            raise ApiError(401, "unauthorized", "bearer token required")
        record = self.tokens.get(token)
        if record is None:
            raise ApiError(401, "unauthorized", "unknown or revoked token")
        return record.company

    # notifications ---------------------------------------------------------

    def notify_added_as_supplier(self, customer: Company, supplier: Company,
                                 relation_key: tuple[str, str, str]) -> None:
        """Append one notification per relation; duplicates are no-ops."""
        if not supplier.contact_email or relation_key in self.notified:
            return
        with self.lock:
            if relation_key in self.notified:
                return
            self.notified.add(relation_key)
            self.outbox.append(OutboxEntry(
                to=supplier.contact_email,
                subject=f"{customer.legal_name} listed you as a supplier",
                body=(f"{customer.legal_name} added {supplier.legal_name} as a "
                      f"supplier on the platform. Claim your company profile to "
                      f"review the relation."),
                cause="added_as_supplier",
                created_at=utc_now()))
            self.persist()


def deliver_outbox(state: ServiceState) -> int:
    """Send undelivered entries through SMTP; returns the delivered count.

    Optional adapter: without SMTP settings the outbox simply accumulates.
    """
    smtp = state.config.smtp
    if not smtp:
        return 0
    delivered = 0
    with smtplib.SMTP(smtp["host"], smtp.get("port", 25)) as session:
        for entry in state.outbox:
            if entry.delivered:
                continue
            message = EmailMessage()
            message["From"] = smtp.get("sender", "platform@example.org")
            message["To"] = entry.to
            message["Subject"] = entry.subject
            message.set_content(entry.body)
            session.send_message(message)
            entry.delivered = True
            delivered += 1
    state.persist()
    return delivered


# -- wire models -------------------------------------------------------------


class CompanySummary(BaseModel):
    id: str
    legal_name: str
    industry: Optional[str] = None
    country: Optional[str] = None
    continent: Optional[str] = None
    transparent: bool


class CompanyList(BaseModel):
    items: list[CompanySummary]
    total: int
    page: int
    page_size: int


class RelationCounts(BaseModel):
    suppliers_extracted: int
    suppliers_predicted: int
    suppliers_manual: int
    customers: int


class CompanyDetail(CompanySummary):
    aliases: list[str]
    market_cap_usd: Optional[float] = None
    website_domain: Optional[str] = None
    contact_email: Optional[str] = None
    employee_count: Optional[int] = None
    revenue_usd: Optional[float] = None
    metadata_source: str
    relation_counts: RelationCounts


class ProvenanceRef(BaseModel):
    url: str
    score: float


class RelationRow(BaseModel):
    customer: str
    supplier: str
    supplier_name: str
    origin: str
    review: str
    confidence: float
    provenance: list[ProvenanceRef]
    persisted: bool = True


class SupplierRows(BaseModel):
    company: str
    items: list[RelationRow]


class ClaimRequest(BaseModel):
    company_id: str
    email: str


class ClaimResponse(BaseModel):
    status: str


class VerifyRequest(BaseModel):
    code: str


class VerifyResponse(BaseModel):
    token: str
    company_id: str


class AddSupplierRequest(BaseModel):
    supplier_name: str


class AddSupplierResponse(BaseModel):
    outcome: str  # matched | created
    relation: RelationRow


class UploadRowOutcome(BaseModel):
    row: int
    name: str
    outcome: str  # matched | created | error
    error: Optional[str] = None


class UploadResponse(BaseModel):
    outcomes: list[UploadRowOutcome]


class ReviewRequest(BaseModel):
    verdict: str


class TransparencyResponse(BaseModel):
    group_by: str
    rows: list[dict]


class NudgeResponse(BaseModel):
    percentage: int
    message: str


class OutboxResponse(BaseModel):
    items: list[dict]


# -- app factory --------------------------------------------------------------


def _relation_row(graph: SupplierGraph, relation, persisted: bool = True) -> RelationRow:
    return RelationRow(
        customer=relation.customer,
        supplier=relation.supplier,
        supplier_name=graph.company(relation.supplier).legal_name,
        origin=relation.origin.value,
        review=relation.review.value,
        confidence=relation.confidence,
        provenance=[ProvenanceRef(url=d.url, score=d.score) for d in relation.provenance],
        persisted=persisted,
    )


def reject_unknown_params(*allowed: str):
    """Fail-closed query contract: unknown query parameters are a 400."""

    def checker(request: Request):
        unknown = set(request.query_params) - set(allowed)
        if unknown:
            raise ApiError(400, "unknown-parameter",
                           f"unknown query parameters: {sorted(unknown)}")

    return Depends(checker)


def create_app(graph: SupplierGraph, config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    state = ServiceState(graph, config)
    app = FastAPI(title="supplier relation platform", version="0.1.0")
    app.state.service = state

    @app.exception_handler(ApiError)
    async def handle_api_error(_request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(UnknownCompanyError)
    async def handle_unknown_company(_request, exc):
        return JSONResponse(status_code=404,
                            content={"code": "unknown-company", "message": str(exc)})

    @app.exception_handler(UnknownRelationError)
    async def handle_unknown_relation(_request, exc):
        return JSONResponse(status_code=404,
                            content={"code": "unknown-relation", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_request, exc):
        return JSONResponse(status_code=422,
                            content={"code": "validation", "message": str(exc.errors()[:1])})

    def bearer_company(request: Request) -> str:
        header = request.headers.get("Authorization", "")
        token = header.removeprefix("Bearer ").strip() if header.startswith("Bearer ") else None
        return state.company_for_token(token)

    # -- public reads -----------------------------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok", "companies": len(graph)}

    @app.get("/api/companies", response_model=CompanyList,
             dependencies=[reject_unknown_params("q", "page", "page_size")])
    def list_companies(q: str = "", page: int = 1, page_size: int = 0):
        page_size = page_size or config.page_size
        transparent_ids = analytics.transparent_companies(graph)
        companies = graph.companies()
        if q:
            needle = q.lower()
            companies = [c for c in companies
                         if needle in c.legal_name.lower()
                         or any(needle in a.lower() for a in c.aliases)]
        total = len(companies)
        start = (max(page, 1) - 1) * page_size
        items = [
            CompanySummary(
                id=c.id, legal_name=c.legal_name, industry=c.industry,
                country=c.country, continent=c.continent,
                transparent=c.id in transparent_ids)
            for c in companies[start:start + page_size]
        ]
        return CompanyList(items=items, total=total, page=max(page, 1), page_size=page_size)

    @app.get("/api/companies/{company_id}", response_model=CompanyDetail,
             dependencies=[reject_unknown_params()])
    def company_detail(company_id: str):
        company = graph.company(company_id)
        suppliers = graph.suppliers_of(company_id, include_rejected=True)
        return CompanyDetail(
            id=company.id, legal_name=company.legal_name, industry=company.industry,
            country=company.country, continent=company.continent,
            transparent=analytics.is_transparent(graph, company_id),
            aliases=sorted(company.aliases),
            market_cap_usd=company.market_cap_usd,
            website_domain=company.website_domain,
            contact_email=company.contact_email,
            employee_count=company.employee_count,
            revenue_usd=company.revenue_usd,
            metadata_source=company.metadata_source.value,
            relation_counts=RelationCounts(
                suppliers_extracted=sum(1 for r in suppliers if r.origin is Origin.EXTRACTED),
                suppliers_predicted=sum(1 for r in suppliers if r.origin is Origin.PREDICTED),
                suppliers_manual=sum(1 for r in suppliers if r.origin is Origin.MANUAL),
                customers=len(graph.customers_of(company_id, include_rejected=True)),
            ),
        )

    @app.get("/api/companies/{company_id}/suppliers", response_model=SupplierRows,
             dependencies=[reject_unknown_params("include", "include_rejected", "k")])
    def company_suppliers(company_id: str, include: str = "extracted,manual",
                          include_rejected: bool = False, k: int = 5):
        graph.company(company_id)
        origins = []
        for part in include.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                origins.append(Origin(part))
            except ValueError:
                raise ApiError(422, "bad-include",
                               f"include must list origins, got {part!r}") from None
        rows: list[RelationRow] = []
        for origin in origins:
            for relation in graph.suppliers_of(company_id, origin=origin,
                                               include_rejected=include_rejected):
                rows.append(_relation_row(graph, relation))
        if Origin.PREDICTED in origins:
            shown = {(row.supplier, row.origin) for row in rows}
            try:
                links = predict_suppliers(graph, company_id, k=k)
            except MissingMetadataError:
                links = []
            for link in links:
                if (link.supplier, "predicted") in shown:
                    continue
                rows.append(RelationRow(
                    customer=company_id, supplier=link.supplier,
                    supplier_name=graph.company(link.supplier).legal_name,
                    origin="predicted", review="unreviewed",
                    confidence=link.confidence, provenance=[], persisted=False))
        return SupplierRows(company=company_id, items=rows)

    # -- auth --------------------------------------------------------------

    @app.post("/api/auth/claim", response_model=ClaimResponse,
              dependencies=[reject_unknown_params()])
    def claim(request: ClaimRequest):
        if not EMAIL_RE.match(request.email):
            raise ApiError(422, "bad-email", f"not an email address: {request.email!r}")
        state.create_claim(request.company_id, request.email)
        return ClaimResponse(status="verification_sent")

    @app.post("/api/auth/verify", response_model=VerifyResponse,
              dependencies=[reject_unknown_params()])
    def verify(request: VerifyRequest):
        token = state.verify_claim(request.code)
        return VerifyResponse(token=token.token, company_id=token.company)

    # -- mutations -----------------------------------------------------------

    def _add_supplier(company_id: str, supplier_name: str) -> tuple[str, RelationRow]:
        supplier_name = supplier_name.strip()
        if not supplier_name:
            raise ApiError(422, "empty-name", "supplier_name must be nonempty")
        result = match_registry(supplier_name, graph.match_index(),
                                threshold=config.matcher_threshold)
        if result is not None:
            supplier_id = result.candidate
            outcome = "matched"
        else:
            try:
                supplier_id = company_id_for(supplier_name)
            except InvalidRecordError:
                raise ApiError(422, "empty-name",
                               f"name {supplier_name!r} has no usable characters") from None
            graph.upsert_company(Company(
                id=supplier_id, legal_name=supplier_name,
                metadata_source=MetadataSource.MANUAL))
            outcome = "created"
        try:
            relation = graph.upsert_relation(company_id, supplier_id, Origin.MANUAL)
        except SelfSupplyError:
            raise ApiError(422, "self-supply", "a company cannot supply itself") from None
        state.notify_added_as_supplier(
            graph.company(company_id), graph.company(supplier_id), relation.key)
        return outcome, _relation_row(graph, relation)

    @app.post("/api/companies/{company_id}/suppliers", response_model=AddSupplierResponse,
              dependencies=[reject_unknown_params()])
    def add_supplier(company_id: str, request: AddSupplierRequest,
                     actor: str = Depends(bearer_company)):
        graph.company(company_id)
        if actor != company_id:
            raise ApiError(403, "forbidden", "token is bound to a different company")
        outcome, row = _add_supplier(company_id, request.supplier_name)
        state.persist_graph()
        return AddSupplierResponse(outcome=outcome, relation=row)

    @app.post("/api/companies/{company_id}/suppliers/upload", response_model=UploadResponse,
              dependencies=[reject_unknown_params()])
    async def upload_suppliers(company_id: str, request: Request,
                               actor: str = Depends(bearer_company)):
        graph.company(company_id)
        if actor != company_id:
            raise ApiError(403, "forbidden", "token is bound to a different company")
        body = (await request.body()).decode("utf-8", errors="replace")
        rows = _parse_upload_csv(body)
        outcomes: list[UploadRowOutcome] = []
        for lineno, name in rows:
            try:
                outcome, _ = _add_supplier(company_id, name)
                outcomes.append(UploadRowOutcome(row=lineno, name=name, outcome=outcome))
            except ApiError as exc:
                outcomes.append(UploadRowOutcome(row=lineno, name=name,
                                                 outcome="error", error=exc.message))
        state.persist_graph()
        return UploadResponse(outcomes=outcomes)

    @app.post("/api/relations/{customer}/{supplier}/{origin}/review",
              response_model=RelationRow, dependencies=[reject_unknown_params()])
    def review_relation(customer: str, supplier: str, origin: str,
                        request: ReviewRequest, actor: str = Depends(bearer_company)):
        try:
            origin_value = Origin(origin)
        except ValueError:
            raise ApiError(404, "unknown-relation", f"unknown origin {origin!r}") from None
        relation = graph.relation(customer, supplier, origin_value)
        if actor not in (relation.customer, relation.supplier):
            raise ApiError(403, "forbidden",
                           "only the customer or the supplier may review this relation")
        try:
            relation = graph.set_review(customer, supplier, origin_value,
                                        request.verdict, actor=actor)
        except InvalidVerdictError as exc:
            raise ApiError(422, "bad-verdict",
                           f"verdict must be confirmed or rejected, got {exc}") from None
        state.persist_graph()
        return _relation_row(graph, relation)

    # -- analytics ------------------------------------------------------------

    @app.get("/api/analytics/transparency", response_model=TransparencyResponse,
             dependencies=[reject_unknown_params("by")])
    def transparency(by: str = "continent"):
        if by not in ("continent", "industry", "none"):
            raise ApiError(422, "bad-group", f"by must be continent|industry|none, got {by!r}")
        rows = analytics.transparency_report(graph, group_by=by)
        return TransparencyResponse(group_by=by, rows=analytics.rows_to_dicts(rows))

    @app.get("/api/companies/{company_id}/nudge", response_model=NudgeResponse,
             dependencies=[reject_unknown_params()])
    def nudge(company_id: str):
        result = analytics.nudge_message(graph, company_id)
        return NudgeResponse(percentage=result.percentage, message=result.message)

    if config.expose_outbox:
        @app.get("/api/outbox", response_model=OutboxResponse,
                 dependencies=[reject_unknown_params("cause")])
        def outbox(cause: str = ""):
            items = [entry.to_dict() for entry in state.outbox
                     if not cause or entry.cause == cause]
            return OutboxResponse(items=items)

    if config.static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so /api/* keeps routing to the handlers above
        app.mount("/", StaticFiles(directory=str(config.static_dir), html=True),
                  name="ui")

    return app


def _parse_upload_csv(body: str) -> list[tuple[int, str]]:
    """Parse the upload body: header `name[,country]`, one supplier per row."""
    import csv
    import io

    if not body.strip():
        raise ApiError(422, "empty-file", "upload body is empty")
    reader = csv.DictReader(io.StringIO(body))
    if reader.fieldnames is None or "name" not in [f.strip() for f in reader.fieldnames]:
        raise ApiError(422, "bad-csv", "upload needs a header row with a `name` column")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        name = (row.get("name") or "").strip()
        rows.append((lineno, name))
    if not rows:
        raise ApiError(422, "empty-file", "upload contains no data rows")
    return rows
