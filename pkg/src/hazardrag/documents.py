"""Report documents: paragraph records, role heuristics, cleansing, loading."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .hazards import validate_hazard

ROLE_CONTENT = "content"
ROLE_TOC = "toc"
ROLE_ACKNOWLEDGMENTS = "acknowledgments"
ROLE_REFERENCES = "references"
ROLE_OTHER_NONCONTENT = "other-noncontent"

PARAGRAPH_ROLES = (
    ROLE_CONTENT,
    ROLE_TOC,
    ROLE_ACKNOWLEDGMENTS,
    ROLE_REFERENCES,
    ROLE_OTHER_NONCONTENT,
)


class DocumentFormatError(ValueError):
    """Raised for malformed document inputs."""


@dataclass(frozen=True)
class Paragraph:
    """One paragraph of a report; role=None means "classify on demand"."""

    index: int
    text: str
    role: str | None = None


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    hazard_type: str
    event_year: int
    event_location: str
    body: tuple[Paragraph, ...]


@dataclass(frozen=True)
class DocumentMeta:
    """The per-document context rendered into generation prompts."""

    doc_id: str
    hazard_type: str
    event_year: int
    event_location: str

    @classmethod
    def of(cls, document: Document) -> "DocumentMeta":
        return cls(
            doc_id=document.id,
            hazard_type=document.hazard_type,
            event_year=document.event_year,
            event_location=document.event_location,
        )


# ---------------------------------------------------------------------------
# Role heuristics
# ---------------------------------------------------------------------------

_TOC_RE = re.compile(r"^\s*table\s+of\s+contents\b", re.IGNORECASE)
_ACK_RE = re.compile(r"^\s*acknowledg\w*\b", re.IGNORECASE)
_REF_RE = re.compile(r"^\s*(references|bibliography)\b", re.IGNORECASE)

# Citation-shaped lines: "[12] ...", "3. Author, A. ... (1999)", DOI links.
_CITATION_RES = (
    re.compile(r"^\s*\[\d+\]\s"),
    re.compile(r"^\s*(?:\d+[.)]\s+)?[A-Z][\w'-]+,\s+[A-Z]\..*\(\d{4}[a-z]?\)"),
    re.compile(r"\bdoi:|\bdoi\.org/", re.IGNORECASE),
)

# Fraction of citation-shaped lines above which a paragraph is non-content.
_CITATION_FRACTION = 0.8


def _is_citation_line(line: str) -> bool:
    return any(pat.search(line) for pat in _CITATION_RES)


def classify_role(text: str) -> str:
    """Assign a paragraph role from its first line and line shapes."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return ROLE_OTHER_NONCONTENT
    first = lines[0]
    if _TOC_RE.match(first):
        return ROLE_TOC
    if _ACK_RE.match(first):
        return ROLE_ACKNOWLEDGMENTS
    if _REF_RE.match(first):
        return ROLE_REFERENCES
    citing = sum(1 for ln in lines if _is_citation_line(ln))
    if citing / len(lines) >= _CITATION_FRACTION:
        return ROLE_OTHER_NONCONTENT
    return ROLE_CONTENT


def cleanse(document: Document) -> list[Paragraph]:
    """Return the content paragraphs of `document`, roles resolved.

    Paragraphs with an explicit role keep it; unclassified ones are run
    through the heuristics. Idempotent: re-cleansing the output is a no-op.
    """
    kept: list[Paragraph] = []
    for para in document.body:
        role = para.role if para.role is not None else classify_role(para.text)
        if role == ROLE_CONTENT:
            kept.append(replace(para, role=ROLE_CONTENT))
    return kept


# ---------------------------------------------------------------------------
# Construction and loading
# ---------------------------------------------------------------------------


def make_paragraphs(texts: list[str]) -> tuple[Paragraph, ...]:
    """Build a paragraph tuple with strictly increasing indexes, roles unset."""
    return tuple(Paragraph(index=i, text=t) for i, t in enumerate(texts))


def document_from_dict(data: dict) -> Document:
    """Parse the JSON document shape {id, title, hazard_type, ...}."""
    if not isinstance(data, dict):
        raise DocumentFormatError("document must be a JSON object")
    missing = [
        k
        for k in ("id", "title", "hazard_type", "event_year", "event_location", "paragraphs")
        if k not in data
    ]
    if missing:
        raise DocumentFormatError(f"document missing fields: {', '.join(missing)}")
    paragraphs = data["paragraphs"]
    if not isinstance(paragraphs, list) or not all(isinstance(p, str) for p in paragraphs):
        raise DocumentFormatError("paragraphs must be a list of strings")
    try:
        hazard = validate_hazard(str(data["hazard_type"]))
    except ValueError as exc:
        raise DocumentFormatError(str(exc)) from exc
    return Document(
        id=str(data["id"]),
        title=str(data["title"]),
        hazard_type=hazard,
        event_year=int(data["event_year"]),
        event_location=str(data["event_location"]),
        body=make_paragraphs(paragraphs),
    )


def document_to_dict(document: Document) -> dict:
    return {
        "id": document.id,
        "title": document.title,
        "hazard_type": document.hazard_type,
        "event_year": document.event_year,
        "event_location": document.event_location,
        "paragraphs": [p.text for p in document.body],
    }


def split_text_paragraphs(text: str) -> list[str]:
    """Split plain text into paragraphs on blank lines."""
    parts = re.split(r"\n\s*\n", text)
    return [p.strip() for p in parts if p.strip()]


def load_document_file(
    path: str | Path,
    *,
    hazard_type: str | None = None,
    event_year: int | None = None,
    event_location: str | None = None,
) -> list[Document]:
    """Load one or more documents from a .json or .txt file.

    JSON files hold a document object or a list of them. Plain-text files
    need the hazard metadata passed explicitly; the document id is the
    file stem and paragraphs are blank-line separated.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        records = data if isinstance(data, list) else [data]
        return [document_from_dict(r) for r in records]
    if path.suffix.lower() == ".txt":
        if hazard_type is None:
            raise DocumentFormatError(
                f"plain-text document {path.name} requires a hazard_type"
            )
        text = path.read_text(encoding="utf-8")
        return [
            Document(
                id=path.stem,
                title=path.stem,
                hazard_type=validate_hazard(hazard_type),
                event_year=int(event_year or 0),
                event_location=event_location or "",
                body=make_paragraphs(split_text_paragraphs(text)),
            )
        ]
    raise DocumentFormatError(f"unsupported document file type: {path.name}")


def load_documents(
    paths: list[str | Path],
    *,
    hazard_type: str | None = None,
    event_year: int | None = None,
    event_location: str | None = None,
) -> list[Document]:
    """Load documents from files and directories, enforcing unique ids."""
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in (".json", ".txt")))
        else:
            files.append(p)
    documents: list[Document] = []
    seen: set[str] = set()
    for f in files:
        for doc in load_document_file(
            f,
            hazard_type=hazard_type,
            event_year=event_year,
            event_location=event_location,
        ):
            if doc.id in seen:
                raise DocumentFormatError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)
            documents.append(doc)
    return documents
