"""Rule-based prediction of hidden supplier links.

Companies that supply many distinct customers within an industry/region
group are proposed as potential suppliers to the other group members.
Predicted links are advisory: their confidence never exceeds the
reliability threshold, so they cannot make a company look transparent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingMetadataError
from .graph import SupplierGraph
from .model import Origin, Review

PREDICTION_BASE_CONFIDENCE = 0.3
PREDICTION_CONFIDENCE_SPAN = 0.3
DEFAULT_TOP_K = 5

# Origins that count as evidence when ranking suppliers; predicted edges
# never feed back into the ranking.
EVIDENCE_ORIGINS = (Origin.EXTRACTED, Origin.MANUAL)


@dataclass(frozen=True)
class GroupKey:
    industry: str
    region: str


@dataclass(frozen=True)
class PredictedLink:
    customer: str
    supplier: str
    group: GroupKey
    support: int
    confidence: float


def group_of(graph: SupplierGraph, company_id: str) -> GroupKey:
    company = graph.company(company_id)
    if not company.industry or not company.continent:
        raise MissingMetadataError(
            f"{company_id} lacks industry or continent metadata")
    return GroupKey(industry=company.industry, region=company.continent)


def supplier_rank(graph: SupplierGraph, group: GroupKey) -> list[tuple[str, int]]:
    """Group members ordered by support, then by id.

    Support is the number of distinct customers (anywhere in the graph)
    the member supplies through non-rejected extracted or manual
    relations.
    """
    members = [
        company.id for company in graph.companies()
        if company.industry == group.industry and company.continent == group.region
    ]
    if not members:
        return []
    customers_by_supplier: dict[str, set[str]] = {member: set() for member in members}
    for relation in graph.relations():
        if (relation.supplier in customers_by_supplier
                and relation.origin in EVIDENCE_ORIGINS
                and relation.review is not Review.REJECTED):
            customers_by_supplier[relation.supplier].add(relation.customer)
    ranked = [(member, len(customers_by_supplier[member])) for member in members]
    ranked.sort(key=lambda pair: (-pair[1], pair[0]))
    return ranked


def predict_suppliers(
    graph: SupplierGraph,
    company_id: str,
    k: int = DEFAULT_TOP_K,
    only_if_empty: bool = False,
) -> list[PredictedLink]:
    """Top-k group suppliers for a company, excluding itself and the
    suppliers it already has (any non-rejected origin).

    Confidence maps normalized support into (0, reliability threshold]:
    base 0.3 plus 0.3 times support over the group's maximum support. With
    only_if_empty set, companies that already have extracted or manual
    suppliers get no predictions.
    """
    group = group_of(graph, company_id)
    if only_if_empty:
        existing_evidence = [
            rel for rel in graph.suppliers_of(company_id)
            if rel.origin in EVIDENCE_ORIGINS
        ]
        if existing_evidence:
            return []

    ranked = supplier_rank(graph, group)
    if not ranked:
        return []
    max_support = max(support for _, support in ranked)
    current_suppliers = {rel.supplier for rel in graph.suppliers_of(company_id)}

    links: list[PredictedLink] = []
    for supplier_id, support in ranked:
        if supplier_id == company_id or supplier_id in current_suppliers:
            continue
        normalized = support / max_support if max_support else 0.0
        links.append(PredictedLink(
            customer=company_id,
            supplier=supplier_id,
            group=group,
            support=support,
            confidence=round(
                PREDICTION_BASE_CONFIDENCE + PREDICTION_CONFIDENCE_SPAN * normalized, 10),
        ))
        if len(links) == k:
            break
    return links
