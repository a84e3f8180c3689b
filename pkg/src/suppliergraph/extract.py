"""Text extraction from fetched documents.

Plain text passes through, HTML is stripped of tags and script/style
blocks with the stdlib parser, and PDF extraction is delegated to a
pluggable callable so the core build carries no heavyweight document
dependency. Fixture corpora ship pre-extracted ".txt" sidecars next to
their PDF files.
"""

from __future__ import annotations

from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Optional

from .errors import ExtractionFailedError
from .model import ContentType

# Takes raw PDF bytes, returns extracted text; raises on failure.
PdfExtractor = Callable[[bytes], str]


class _HtmlTextParser(HTMLParser):
    _SKIPPED = {"script", "style", "noscript", "template"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIPPED:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIPPED and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth and data.strip():
            self.chunks.append(data.strip())


def html_to_text(payload: bytes) -> str:
    parser = _HtmlTextParser()
    parser.feed(payload.decode("utf-8", errors="replace"))
    return " ".join(parser.chunks)


def _sidecar_text(origin_path: Optional[str]) -> Optional[str]:
    if not origin_path:
        return None
    sidecar = Path(str(origin_path) + ".txt")
    if sidecar.exists():
        return sidecar.read_text(encoding="utf-8")
    return None


def extract_text(
    payload: bytes,
    content_type: ContentType,
    origin_path: Optional[str] = None,
    pdf_extractor: Optional[PdfExtractor] = None,
) -> str:
    """Extract plain text from a document payload.

    Raises ExtractionFailedError when the document cannot be processed;
    the pipeline records such documents with empty text and a flag.
    """
    if content_type is ContentType.PLAIN:
        return payload.decode("utf-8", errors="replace")
    if content_type is ContentType.HTML:
        return html_to_text(payload)

    # pdf: sidecar first, then the configured extractor
    sidecar = _sidecar_text(origin_path)
    if sidecar is not None:
        return sidecar
    if pdf_extractor is not None:
        try:
            return pdf_extractor(payload)
        except Exception as exc:
            raise ExtractionFailedError(f"pdf extractor failed: {exc}") from exc
    raise ExtractionFailedError("no pdf extractor configured and no sidecar text found")
