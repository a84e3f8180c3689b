"""Pluggable clients for the collection pipeline.

Every stage that touches the outside world (web search, document download,
entity recognition) is a small interface with two implementations: a
remote one for live runs and a deterministic fixture/gazetteer one used in
all tests. Remote clients need credentials; without them the pipeline
falls back to fixture mode with a startup notice.
"""

from __future__ import annotations

import json
import time
import urllib.parse
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import requests

from .errors import (
    ClientUnavailableError,
    MalformedResponseError,
    QuotaExceededError,
    SizeCapExceededError,
)
from .matching import fold_text, normalize_name
from .model import ContentType

DEFAULT_MAX_RESULTS = 5
DEFAULT_SIZE_CAP = 20 * 1024 * 1024
DEFAULT_POLITENESS_DELAY = 1.0

# Fixture fetches get a constant retrieval time so repeated runs over the
# same corpus serialize to byte-identical snapshots.
FIXTURE_FETCH_TIME = datetime(2024, 1, 10, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SearchQuery:
    company: str
    text: str
    rank: int


@dataclass(frozen=True)
class SearchHit:
    query: SearchQuery
    url: str
    title: Optional[str] = None


@dataclass
class RawDocument:
    url: str
    payload: bytes
    content_type: ContentType
    fetched_at: datetime
    origin_path: Optional[str] = None


@dataclass(frozen=True)
class CandidateMention:
    raw_name: str
    recognizer_id: str


def detect_content_type(url: str, header: Optional[str], payload: bytes) -> ContentType:
    """Resolve a content type from headers, then extension, then sniffing."""
    if header:
        header = header.split(";")[0].strip().lower()
        if header == "application/pdf":
            return ContentType.PDF
        if header in ("text/html", "application/xhtml+xml"):
            return ContentType.HTML
        if header.startswith("text/"):
            return ContentType.PLAIN
    path = urllib.parse.urlparse(url).path.lower()
    if path.endswith(".pdf"):
        return ContentType.PDF
    if path.endswith((".html", ".htm")):
        return ContentType.HTML
    if path.endswith((".txt", ".text", ".csv")):
        return ContentType.PLAIN
    head = payload[:256].lstrip()
    if head.startswith(b"%PDF-"):
        return ContentType.PDF
    if head[:64].lower().startswith((b"<!doctype", b"<html")):
        return ContentType.HTML
    return ContentType.PLAIN


# -- fixture manifest -----------------------------------------------------


@dataclass
class ManifestEntry:
    url: str
    local_path: Path
    content_type: Optional[ContentType]
    title: Optional[str] = None


class FixtureManifest:
    """JSON map company_id -> [{url, local_path, content_type?}, ...].

    Relative local paths resolve against the manifest file's directory.
    """

    def __init__(self, entries: dict[str, list[ManifestEntry]]):
        self.entries = entries

    @classmethod
    def load(cls, path: str | Path) -> "FixtureManifest":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        entries: dict[str, list[ManifestEntry]] = {}
        for company_id, docs in raw.items():
            entries[company_id] = [
                ManifestEntry(
                    url=doc["url"],
                    local_path=(path.parent / doc["local_path"]).resolve(),
                    content_type=ContentType(doc["content_type"]) if doc.get("content_type") else None,
                    title=doc.get("title"),
                )
                for doc in docs
            ]
        return cls(entries)

    def for_company(self, company_id: str) -> list[ManifestEntry]:
        return self.entries.get(company_id, [])

    def entry_for_url(self, url: str) -> Optional[ManifestEntry]:
        for docs in self.entries.values():
            for entry in docs:
                if entry.url == url:
                    return entry
        return None


# -- search ---------------------------------------------------------------


class FixtureSearchClient:
    """Serves hits straight from a fixture manifest, in manifest order."""

    def __init__(self, manifest: FixtureManifest):
        self.manifest = manifest

    def search(self, query: SearchQuery, max_results: int = DEFAULT_MAX_RESULTS) -> list[SearchHit]:
        return [
            SearchHit(query=query, url=entry.url, title=entry.title)
            for entry in self.manifest.for_company(query.company)[:max_results]
        ]


class RemoteSearchClient:
    """Thin JSON web-search client; shape: GET endpoint?q=... -> {results: [{url, title}]}."""

    def __init__(self, endpoint: str, api_key: Optional[str], timeout: float = 20.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def search(self, query: SearchQuery, max_results: int = DEFAULT_MAX_RESULTS) -> list[SearchHit]:
        if not self.api_key:
            raise ClientUnavailableError("search API key not configured")
        try:
            response = requests.get(
                self.endpoint,
                params={"q": query.text, "count": max_results},
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ClientUnavailableError(f"search request failed: {exc}") from exc
        if response.status_code == 429:
            raise QuotaExceededError("search provider quota exceeded")
        if response.status_code >= 400:
            raise ClientUnavailableError(f"search provider returned {response.status_code}")
        items = response.json().get("results", [])[:max_results]
        return [SearchHit(query=query, url=item["url"], title=item.get("title"))
                for item in items]


# -- fetch ----------------------------------------------------------------


class FixtureFetcher:
    """Reads documents from local fixture files listed in the manifest."""

    def __init__(self, manifest: FixtureManifest, size_cap: int = DEFAULT_SIZE_CAP):
        self.manifest = manifest
        self.size_cap = size_cap

    def fetch(self, hit: SearchHit) -> RawDocument:
        entry = self.manifest.entry_for_url(hit.url)
        if entry is None:
            raise ClientUnavailableError(f"url not in fixture manifest: {hit.url}")
        payload = entry.local_path.read_bytes()
        if len(payload) > self.size_cap:
            raise SizeCapExceededError(
                f"{hit.url}: {len(payload)} bytes exceeds cap {self.size_cap}")
        content_type = entry.content_type or detect_content_type(hit.url, None, payload)
        return RawDocument(
            url=hit.url,
            payload=payload,
            content_type=content_type,
            fetched_at=FIXTURE_FETCH_TIME,
            origin_path=str(entry.local_path),
        )


class HttpFetcher:
    """Downloads documents with a per-host politeness delay and a size cap."""

    def __init__(
        self,
        politeness_delay: float = DEFAULT_POLITENESS_DELAY,
        size_cap: int = DEFAULT_SIZE_CAP,
        timeout: float = 30.0,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.politeness_delay = politeness_delay
        self.size_cap = size_cap
        self.timeout = timeout
        self._sleep = sleep
        self._clock = clock
        self._last_request: dict[str, float] = {}

    def _wait_for_host(self, host: str) -> None:
        now = self._clock()
        last = self._last_request.get(host)
        wait = 0.0
        if last is not None:
            wait = max(0.0, self.politeness_delay - (now - last))
            if wait > 0:
                self._sleep(wait)
        self._last_request[host] = now + wait

    def fetch(self, hit: SearchHit) -> RawDocument:
        host = urllib.parse.urlparse(hit.url).netloc
        self._wait_for_host(host)
        try:
            response = requests.get(hit.url, timeout=self.timeout, stream=True)
            response.raise_for_status()
            declared = response.headers.get("Content-Length")
            if declared and int(declared) > self.size_cap:
                raise SizeCapExceededError(f"{hit.url}: declared {declared} bytes")
            payload = b""
            for chunk in response.iter_content(chunk_size=65536):
                payload += chunk
                if len(payload) > self.size_cap:
                    raise SizeCapExceededError(f"{hit.url}: body exceeds {self.size_cap} bytes")
        except requests.RequestException as exc:
            raise ClientUnavailableError(f"fetch failed for {hit.url}: {exc}") from exc
        content_type = detect_content_type(
            hit.url, response.headers.get("Content-Type"), payload)
        return RawDocument(
            url=hit.url,
            payload=payload,
            content_type=content_type,
            fetched_at=datetime.now(timezone.utc),
        )


# -- entity recognition ----------------------------------------------------


class GazetteerRecognizer:
    """Deterministic recognizer scanning text for known registry names.

    The test-grade stand-in for the remote model: it can only find
    companies that are already in the registry, which is exactly the
    population the matcher would keep anyway.
    """

    recognizer_id = "gazetteer"

    def __init__(self, surfaces: list[tuple[str, str]]):
        # (company_id, surface string); canonical token tuples precomputed
        self._patterns: list[tuple[tuple[str, ...], str]] = []
        seen: set[tuple[str, ...]] = set()
        for _company_id, surface in surfaces:
            canonical = _safe_canonical(surface)
            if not canonical:
                continue
            tokens = tuple(canonical.split())
            if tokens in seen:
                continue
            seen.add(tokens)
            self._patterns.append((tokens, surface))

    @classmethod
    def from_graph(cls, graph) -> "GazetteerRecognizer":
        surfaces = []
        for company in graph.companies():
            surfaces.append((company.id, company.legal_name))
            for alias in sorted(company.aliases):
                surfaces.append((company.id, alias))
        return cls(surfaces)

    def recognize(self, text: str) -> list[CandidateMention]:
        if not text:
            return []
        tokens = fold_text(text).split()
        found: list[tuple[int, str]] = []
        for pattern, surface in self._patterns:
            position = _find_subsequence(tokens, pattern)
            if position >= 0:
                found.append((position, surface))
        found.sort()
        return [CandidateMention(raw_name=surface, recognizer_id=self.recognizer_id)
                for _, surface in found]


def _safe_canonical(surface: str) -> str:
    try:
        return normalize_name(surface)
    except Exception:
        return ""


def _find_subsequence(tokens: list[str], pattern: tuple[str, ...]) -> int:
    if not pattern:
        return -1
    first = pattern[0]
    width = len(pattern)
    for i, token in enumerate(tokens):
        if token == first and tuple(tokens[i:i + width]) == pattern:
            return i
    return -1


LLM_PROMPT = (
    "Read the document below and list every organization that appears in it "
    "as a supplier. Reply with a JSON array of organization names and "
    "nothing else.\n\n---\n{text}\n---"
)


class LlmRecognizer:
    """Remote large-language-model recognizer (OpenAI-compatible chat API).

    Decoding is pinned deterministic (temperature 0) and the reply is
    parsed strictly: anything that is not a JSON array of strings raises
    MalformedResponseError. Downstream validation distrusts the output
    entirely, so only registry-matched names survive either way.
    """

    recognizer_id = "llm"

    def __init__(
        self,
        api_key: Optional[str],
        endpoint: str = "https://api.openai.com/v1/chat/completions",
        model: str = "gpt-4",
        timeout: float = 60.0,
        transport: Optional[Callable[[str], str]] = None,
    ):
        self.api_key = api_key
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self._transport = transport or self._http_transport

    def _http_transport(self, prompt: str) -> str:
        if not self.api_key:
            raise ClientUnavailableError("LLM API key not configured")
        try:
            response = requests.post(
                self.endpoint,
                json={
                    "model": self.model,
                    "temperature": 0,
                    "messages": [{"role": "user", "content": prompt}],
                },
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]
        except requests.RequestException as exc:
            raise ClientUnavailableError(f"recognizer request failed: {exc}") from exc

    def recognize(self, text: str) -> list[CandidateMention]:
        if not text:
            return []
        reply = self._transport(LLM_PROMPT.format(text=text))
        try:
            names = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise MalformedResponseError(f"recognizer reply is not JSON: {reply[:80]!r}") from exc
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise MalformedResponseError("recognizer reply is not a JSON array of strings")
        mentions: list[CandidateMention] = []
        seen: set[str] = set()
        for name in names:
            name = name.strip()
            if name and name not in seen:
                seen.add(name)
                mentions.append(CandidateMention(raw_name=name, recognizer_id=self.recognizer_id))
        return mentions
