"""Document reliability scoring."""

import itertools

import pytest

from suppliergraph.scoring import SUPPLY_KEYWORDS, score_document

NAME = "Orchard Computing Inc."
OWN_URL = "https://orchardcomputing.com/responsibility/supplier-list.txt"
OTHER_URL = "https://news.example.com/articles/1234.html"


def build_text(name_in_text: bool, keyword_in_text: bool) -> str:
    parts = ["The quarterly report covers component sourcing."]
    if name_in_text:
        parts.append("Orchard Computing discloses the partners below.")
    if keyword_in_text:
        parts.append("The supplier list follows.")
    return " ".join(parts)


def test_all_signals_is_fully_reliable():
    breakdown = score_document(NAME, OWN_URL, build_text(True, True))
    assert breakdown.score == 1.0
    assert breakdown.reliable


def test_name_only_in_text_caps_at_threshold():
    # third-party coverage: not self-published, so never reliable
    breakdown = score_document(NAME, OTHER_URL, build_text(True, True))
    assert breakdown.score == 0.6
    assert not breakdown.reliable


def test_no_signals_scores_zero():
    breakdown = score_document(NAME, OTHER_URL, "nothing relevant here")
    assert breakdown.score == 0.0
    assert not breakdown.reliable


def test_url_and_text_without_keyword_is_reliable():
    breakdown = score_document(NAME, OWN_URL, build_text(True, False))
    assert breakdown.score == pytest.approx(0.7)
    assert breakdown.reliable


def test_url_without_text_is_not_reliable():
    breakdown = score_document(NAME, OWN_URL, build_text(False, True))
    assert breakdown.score == 0.6
    assert not breakdown.reliable


def test_reliable_iff_name_in_url_and_text():
    """Exhaustive truth table over the three indicator bits."""
    for in_url, in_text, keyword in itertools.product((False, True), repeat=3):
        url = OWN_URL if in_url else OTHER_URL
        breakdown = score_document(NAME, url, build_text(in_text, keyword))
        assert (breakdown.name_in_url, breakdown.name_in_text, breakdown.keyword_in_text) == \
            (in_url, in_text, keyword)
        assert breakdown.reliable == (in_url and in_text)
        assert 0.0 <= breakdown.score <= 1.0


def test_url_match_is_space_insensitive_and_case_insensitive():
    breakdown = score_document("Orchard Computing Inc.",
                               "HTTPS://ORCHARDCOMPUTING.COM/X.TXT", "")
    assert breakdown.name_in_url


def test_text_match_respects_token_boundaries():
    # "orchard computing" must not fire inside "orchard computingly"
    breakdown = score_document(NAME, OTHER_URL, "orchard computingly useless")
    assert not breakdown.name_in_text


def test_keywords_cover_phrases():
    assert "supply chain" in SUPPLY_KEYWORDS
    breakdown = score_document(NAME, OTHER_URL, "A resilient supply chain matters.")
    assert breakdown.keyword_in_text
