"""Company-name normalization and threshold fuzzy matching.

Recognized entity mentions are validated against the known-company registry
by canonicalizing both sides and comparing with a normalized edit-distance
similarity. All functions here are pure and safe for parallel use.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import InvalidRecordError

# Trailing legal-form tokens stripped during canonicalization. Overridable
# via a config file with one suffix per line (see load_suffixes).
LEGAL_SUFFIXES = frozenset({
    "inc", "incorporated", "corp", "corporation", "ltd", "limited", "llc",
    "plc", "co", "company", "ag", "se", "sa", "nv", "gmbh", "kk", "oyj",
    "ab", "spa", "holdings", "group",
})

DEFAULT_MATCH_THRESHOLD = 0.90

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def load_suffixes(path: str | Path) -> frozenset[str]:
    """Load a legal-suffix list from a file with one suffix per line.

    Blank lines and lines starting with '#' are ignored; entries are
    lowercased.
    """
    suffixes = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.strip().lower()
        if entry and not entry.startswith("#"):
            suffixes.add(entry)
    return frozenset(suffixes)


def fold_text(raw: str) -> str:
    """Lowercase, transliterate to ASCII, and collapse punctuation to spaces.

    This is the character-level half of normalize_name, without the legal
    suffix stripping; it is also used to canonicalize document text before
    substring checks.
    """
    folded = unicodedata.normalize("NFKD", raw.casefold())
    folded = folded.encode("ascii", "ignore").decode("ascii")
    folded = _NON_ALNUM.sub(" ", folded)
    return " ".join(folded.split())


def normalize_name(raw: str, suffixes: frozenset[str] = LEGAL_SUFFIXES) -> str:
    """Canonicalize a company name.

    Lowercases, transliterates diacritics, replaces punctuation with spaces,
    collapses whitespace, then repeatedly strips trailing legal-suffix
    tokens. Stripping never empties the name: if every token is a suffix,
    the last one is retained.

    Raises InvalidRecordError for an empty input.
    """
    if not raw or not raw.strip():
        raise InvalidRecordError("company name is empty")
    tokens = fold_text(raw).split()
    # len > 1 guard keeps the last token when every token is a suffix
    while len(tokens) > 1 and tokens[-1] in suffixes:
        tokens.pop()
    return " ".join(tokens)


def company_id_for(name: str, suffixes: frozenset[str] = LEGAL_SUFFIXES) -> str:
    """Derive the stable registry id: the canonical name, hyphen-separated."""
    canonical = normalize_name(name, suffixes)
    if not canonical:
        raise InvalidRecordError(f"name {name!r} canonicalizes to nothing")
    return canonical.replace(" ", "-")


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def _canonical_or_empty(raw: str, suffixes: frozenset[str]) -> str:
    if not raw or not raw.strip():
        return ""
    return normalize_name(raw, suffixes)


def similarity(a: str, b: str, suffixes: frozenset[str] = LEGAL_SUFFIXES) -> float:
    """Similarity of two names in [0, 1] on their canonical forms.

    1.0 when the canonical forms are equal; otherwise
    1 - levenshtein / max(length). Symmetric by construction.
    """
    ca = _canonical_or_empty(a, suffixes)
    cb = _canonical_or_empty(b, suffixes)
    if ca == cb:
        return 1.0
    longest = max(len(ca), len(cb))
    return 1.0 - levenshtein(ca, cb) / longest


@dataclass(frozen=True)
class MatchResult:
    """A registry candidate whose similarity cleared the threshold."""

    candidate: str
    similarity: float


def match_registry(
    raw: str,
    registry: "CompanyIndex",
    threshold: float = DEFAULT_MATCH_THRESHOLD,
    suffixes: frozenset[str] = LEGAL_SUFFIXES,
) -> Optional[MatchResult]:
    """Match a raw name against registry legal names and aliases.

    Returns the candidate with maximal similarity if it reaches the
    threshold, else None (a normal outcome: the mention is dropped). Ties
    break to the lexicographically smallest company id. Exact canonical
    equality short-circuits the scan.
    """
    canonical = _canonical_or_empty(raw, suffixes)
    if not canonical:
        return None

    exact = registry.ids_for_canonical(canonical)
    if exact:
        return MatchResult(candidate=min(exact), similarity=1.0)

    best_id: Optional[str] = None
    best_sim = 0.0
    # iter_surfaces yields ids in sorted order, so strict > keeps the
    # lexicographically smallest id on ties
    for company_id, surfaces in registry.iter_surfaces():
        sim = max(similarity(canonical, s, suffixes) for s in surfaces)
        if sim > best_sim:
            best_id, best_sim = company_id, sim
    if best_id is not None and best_sim >= threshold:
        return MatchResult(candidate=best_id, similarity=best_sim)
    return None


class CompanyIndex:
    """Read-only matching view over a registry: canonical surfaces per id.

    Kept deliberately tiny so matching stays decoupled from the graph
    store; SupplierGraph exposes one via match_index().
    """

    def __init__(self, suffixes: frozenset[str] = LEGAL_SUFFIXES):
        self._suffixes = suffixes
        self._surfaces: dict[str, set[str]] = {}
        self._by_canonical: dict[str, set[str]] = {}

    def add(self, company_id: str, names: Iterable[str]) -> None:
        bucket = self._surfaces.setdefault(company_id, set())
        for name in names:
            canonical = _canonical_or_empty(name, self._suffixes)
            if not canonical:
                continue
            bucket.add(canonical)
            self._by_canonical.setdefault(canonical, set()).add(company_id)

    def ids_for_canonical(self, canonical: str) -> set[str]:
        return self._by_canonical.get(canonical, set())

    def iter_surfaces(self):
        return iter(sorted(self._surfaces.items()))

    def __len__(self) -> int:
        return len(self._surfaces)
