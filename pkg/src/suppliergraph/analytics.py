"""Transparency proxy, grouped distribution reports, coverage evaluation,
and the social-norm nudge statistic.

A company counts as transparent when at least one supplier was extracted
for it from public data and not rejected in review. Predicted and manual
relations never affect transparency.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Optional

from .errors import ManifestMismatchError
from .graph import SupplierGraph
from .matching import match_registry, normalize_name
from .model import Origin, Review

NUDGE_TEMPLATE = "{p}% of companies similar to yours are now sharing their supply chain data"

# Region labels for coverage reports; Asia and the Middle East report as
# one evaluation region.
REGION_LABELS = {
    "NA": "North America",
    "EU": "Europe",
    "AS": "Asia and Middle East",
    "ME": "Asia and Middle East",
    "AF": "Africa",
    "SA": "South America",
    "OC": "Oceania",
}

UNKNOWN_LABEL = "unknown"
TOTAL_LABEL = "total"


def round_half_up(value: Decimal | float, places: int) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(value).quantize(quantum, rounding=ROUND_HALF_UP))


def percentage_of(part: int, whole: int, places: int = 2) -> Optional[float]:
    if whole == 0:
        return None
    return round_half_up(Decimal(100 * part) / Decimal(whole), places)


@dataclass(frozen=True)
class TransparencyRow:
    group_label: str
    evaluated: int
    transparent: int
    percentage: Optional[float]

    def to_dict(self) -> dict:
        return {
            "group": self.group_label,
            "evaluated": self.evaluated,
            "transparent": self.transparent,
            "percentage": self.percentage,
        }


@dataclass(frozen=True)
class CoverageRow:
    region: str
    companies_probed: int
    published_lists_checked: int
    identified_lists_auto: int
    suppliers_checked: int
    suppliers_auto: int
    matched_initial_auto: int

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "companies_probed": self.companies_probed,
            "published_lists_checked": self.published_lists_checked,
            "identified_lists_auto": self.identified_lists_auto,
            "suppliers_checked": self.suppliers_checked,
            "suppliers_auto": self.suppliers_auto,
            "matched_initial_auto": self.matched_initial_auto,
        }


@dataclass(frozen=True)
class Nudge:
    percentage: int
    message: str

    def to_dict(self) -> dict:
        return {"percentage": self.percentage, "message": self.message}


def transparent_companies(graph: SupplierGraph) -> set[str]:
    """Ids of all companies with a non-rejected extracted supplier relation.

    One pass over the relations; report-scale callers use this instead of
    per-company scans.
    """
    return {
        rel.customer for rel in graph.relations()
        if rel.origin is Origin.EXTRACTED and rel.review is not Review.REJECTED
    }


def is_transparent(graph: SupplierGraph, company_id: str) -> bool:
    """True iff the company has a non-rejected extracted supplier relation."""
    graph.company(company_id)
    return company_id in transparent_companies(graph)


def transparency_report(graph: SupplierGraph, group_by: str = "continent") -> list[TransparencyRow]:
    """One row per group plus a total row, sorted by percentage descending.

    group_by is continent, industry, or none; companies missing the
    grouping attribute fall into an explicit "unknown" row rather than
    being dropped silently.
    """
    if group_by not in ("continent", "industry", "none"):
        raise ValueError(f"group_by must be continent|industry|none, got {group_by!r}")

    transparent_ids = transparent_companies(graph)
    counts: dict[str, list[int]] = {}
    total_evaluated = 0
    total_transparent = 0
    for company in graph.companies():
        if group_by == "none":
            label = "all"
        else:
            label = getattr(company, group_by) or UNKNOWN_LABEL
        bucket = counts.setdefault(label, [0, 0])
        transparent = company.id in transparent_ids
        bucket[0] += 1
        bucket[1] += transparent
        total_evaluated += 1
        total_transparent += transparent

    rows = [
        TransparencyRow(
            group_label=label,
            evaluated=evaluated,
            transparent=transparent,
            percentage=percentage_of(transparent, evaluated),
        )
        for label, (evaluated, transparent) in counts.items()
    ]
    rows.sort(key=lambda row: (-(row.percentage or 0.0), row.group_label))
    rows.append(TransparencyRow(
        group_label=TOTAL_LABEL,
        evaluated=total_evaluated,
        transparent=total_transparent,
        percentage=percentage_of(total_transparent, total_evaluated),
    ))
    return rows


def coverage_report(
    graph: SupplierGraph,
    ground_truth: dict,
    mentions_by_company: Optional[dict[str, list[str]]] = None,
) -> list[CoverageRow]:
    """Pipeline output versus a manually-checked ground truth, by region.

    ground_truth maps company_id -> {list_url, suppliers}; a null list_url
    marks a company that was probed but publishes no list. suppliers_auto
    counts ground-truth names the recognizer saw (when per-company mention
    lists are supplied, e.g. from the intermediate store); otherwise it
    falls back to the extracted-relation count, as matched_initial_auto.
    """
    per_region: dict[str, dict[str, int]] = {}
    index = graph.match_index()
    for company_id, entry in sorted(ground_truth.items()):
        if not graph.has_company(company_id):
            raise ManifestMismatchError(f"ground truth references unknown company {company_id!r}")
        company = graph.company(company_id)
        region = REGION_LABELS.get(company.continent or "", UNKNOWN_LABEL)
        bucket = per_region.setdefault(region, {
            "companies_probed": 0,
            "published_lists_checked": 0,
            "identified_lists_auto": 0,
            "suppliers_checked": 0,
            "suppliers_auto": 0,
            "matched_initial_auto": 0,
        })
        bucket["companies_probed"] += 1

        has_list = bool(entry.get("list_url"))
        truth_suppliers = entry.get("suppliers", [])
        extracted = {
            rel.supplier
            for rel in graph.suppliers_of(company_id, origin=Origin.EXTRACTED,
                                          include_rejected=True)
        }
        if has_list:
            bucket["published_lists_checked"] += 1
            # the list counts as identified when the pipeline extracted
            # anything from it, regardless of later review verdicts
            if extracted:
                bucket["identified_lists_auto"] += 1
        bucket["suppliers_checked"] += len(truth_suppliers)
        matched = 0
        for name in truth_suppliers:
            result = match_registry(name, index)
            if result is not None and result.candidate in extracted:
                matched += 1
        bucket["matched_initial_auto"] += matched

        if mentions_by_company is not None:
            mentioned = {normalize_name(n) for n in mentions_by_company.get(company_id, [])}
            recognized = sum(1 for name in truth_suppliers if normalize_name(name) in mentioned)
            bucket["suppliers_auto"] += recognized
        else:
            bucket["suppliers_auto"] += matched

    rows = [CoverageRow(region=region, **values)
            for region, values in sorted(per_region.items())]
    if rows:
        rows.append(CoverageRow(region=TOTAL_LABEL, **{
            field: sum(getattr(row, field) for row in rows)
            for field in ("companies_probed", "published_lists_checked",
                          "identified_lists_auto", "suppliers_checked",
                          "suppliers_auto", "matched_initial_auto")
        }))
    return rows


def _peer_percentage(transparent_ids: set[str], peers: list[str]) -> Optional[int]:
    if not peers:
        return None
    transparent = sum(peer in transparent_ids for peer in peers)
    return int(round_half_up(Decimal(100 * transparent) / Decimal(len(peers)), 0))


def nudge_message(graph: SupplierGraph, company_id: str) -> Nudge:
    """Share of peer companies already publishing supply chain data.

    Peers share the company's industry and continent; if that group has no
    other members it widens to the continent, then to the whole registry.
    """
    company = graph.company(company_id)

    candidate_groups = []
    if company.industry and company.continent:
        candidate_groups.append([
            other.id for other in graph.companies()
            if other.id != company_id
            and other.industry == company.industry
            and other.continent == company.continent
        ])
    if company.continent:
        candidate_groups.append([
            other.id for other in graph.companies()
            if other.id != company_id and other.continent == company.continent
        ])
    candidate_groups.append([
        other.id for other in graph.companies() if other.id != company_id
    ])

    transparent_ids = transparent_companies(graph)
    percentage = 0
    for peers in candidate_groups:
        found = _peer_percentage(transparent_ids, peers)
        if found is not None:
            percentage = found
            break
    return Nudge(percentage=percentage, message=NUDGE_TEMPLATE.format(p=percentage))


# -- report formatting ----------------------------------------------------


def rows_to_dicts(rows) -> list[dict]:
    return [row.to_dict() for row in rows]


def to_csv_text(rows) -> str:
    import csv
    import io

    dicts = rows_to_dicts(rows)
    if not dicts:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(dicts[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(dicts)
    return buffer.getvalue()


def to_table_text(rows) -> str:
    dicts = rows_to_dicts(rows)
    if not dicts:
        return "(empty)"
    headers = list(dicts[0].keys())
    cells = [[_render(d[h]) for h in headers] for d in dicts]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    lines.extend("  ".join(row[i].ljust(widths[i]) for i in range(len(headers)))
                 for row in cells)
    return "\n".join(lines)


def _render(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)
