"""Reliability scoring for fetched disclosure documents.

A document is trusted as a self-published supplier disclosure only when the
company's own name shows up both in the URL and in the body text; a name
that appears only in the text points at third-party coverage, which is
capped below the reliability threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

from .matching import fold_text, normalize_name
from .model import RELIABILITY_THRESHOLD

URL_WEIGHT = 0.4
TEXT_WEIGHT = 0.3
KEYWORD_WEIGHT = 0.3

SUPPLY_KEYWORDS = ("supplier", "suppliers", "supply chain", "vendor list", "procurement")


@dataclass(frozen=True)
class ScoreBreakdown:
    name_in_url: bool
    name_in_text: bool
    keyword_in_text: bool
    score: float

    @property
    def reliable(self) -> bool:
        return self.score > RELIABILITY_THRESHOLD


def _contains_tokens(haystack_folded: str, needle_folded: str) -> bool:
    return f" {needle_folded} " in f" {haystack_folded} "


def score_document(company_name: str, url: str, text: str) -> ScoreBreakdown:
    """Score a document for a company from three indicator bits.

    name_in_url: the canonical company name, spaces removed, is a substring
    of the lowercased URL. name_in_text: the canonical name occurs in the
    folded text on token boundaries. keyword_in_text: any supply-chain
    keyword occurs in the folded text. The weighted sum is capped at the
    reliability threshold unless both name indicators hold, so reliable
    documents are exactly the self-published ones.
    """
    canonical = normalize_name(company_name)
    folded_text = fold_text(text) if text else ""

    name_in_url = bool(canonical) and canonical.replace(" ", "") in url.lower()
    name_in_text = bool(canonical) and _contains_tokens(folded_text, canonical)
    keyword_in_text = any(kw in folded_text for kw in SUPPLY_KEYWORDS)

    score = (URL_WEIGHT * name_in_url
             + TEXT_WEIGHT * name_in_text
             + KEYWORD_WEIGHT * keyword_in_text)
    if not (name_in_url and name_in_text):
        score = min(score, RELIABILITY_THRESHOLD)
    return ScoreBreakdown(
        name_in_url=name_in_url,
        name_in_text=name_in_text,
        keyword_in_text=keyword_in_text,
        score=round(score, 10),
    )
