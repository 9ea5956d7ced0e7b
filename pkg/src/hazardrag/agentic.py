"""Provider-driven chunking: proposition extraction and grouped summaries."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .chunking import (
    STRATEGY_AGENTIC,
    STRATEGY_FIXED_TOKEN,
    STRATEGY_PARAGRAPH,
    STRATEGY_PROPOSITION,
    Chunk,
    Tokenizer,
    chunk_fixed_token,
    chunk_paragraph,
)
from .documents import Document, DocumentMeta, Paragraph, cleanse
from .prompts import get_template, render_prompt
from .providers import MAX_PARSE_RETRIES, AgentProvider, CallRecorder, StructuredOutputError

logger = logging.getLogger(__name__)

# Hard cap on propositions per grouped chunk; oversize provider groups are
# split at this boundary rather than retried.
MAX_PROPOSITIONS_PER_CHUNK = 10


@dataclass(frozen=True)
class Proposition:
    """A standalone factual sentence with its source paragraph."""

    text: str
    doc_id: str
    paragraph_index: int


def _normalize_sentence(text: str) -> str:
    return " ".join(text.split())


def extract_propositions(
    paragraph: Paragraph,
    meta: DocumentMeta,
    provider: AgentProvider,
    log: CallRecorder | None = None,
) -> list[Proposition]:
    """Decompose one content paragraph into standalone propositions.

    Parses the provider's JSON object under the "Prop" key; an empty list
    is valid output. Malformed output is regenerated up to
    MAX_PARSE_RETRIES times before raising StructuredOutputError.
    """
    prompt = render_prompt(
        get_template("proposition"),
        {
            "disaster_type": meta.hazard_type,
            "year": meta.event_year,
            "location": meta.event_location,
            "paragraph": paragraph.text,
        },
    )
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw = provider.complete("proposition", prompt)
        call = log.record("proposition", prompt, raw) if log is not None else None
        try:
            data = json.loads(raw)
        except json.JSONDecodeError:
            continue
        if not isinstance(data, dict) or not isinstance(data.get("Prop"), list):
            continue
        texts = [_normalize_sentence(p) for p in data["Prop"] if isinstance(p, str)]
        if len(texts) != len(data["Prop"]) or any(not t for t in texts):
            continue
        if call is not None:
            call.parsed = f"{len(texts)} propositions"
        return [
            Proposition(text=t, doc_id=meta.doc_id, paragraph_index=paragraph.index)
            for t in texts
        ]
    raise StructuredOutputError(
        f"proposition extraction failed for paragraph {paragraph.index} of {meta.doc_id}"
    )


def _parse_groups(raw: str) -> list[tuple[str, list[str]]] | None:
    """Parse {"Chunks": [{"Summary", "List of Propositions"}]} or None."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError:
        return None
    if not isinstance(data, dict) or not isinstance(data.get("Chunks"), list):
        return None
    groups = []
    for entry in data["Chunks"]:
        if not isinstance(entry, dict):
            return None
        summary = entry.get("Summary")
        members = entry.get("List of Propositions")
        if not isinstance(summary, str) or not summary.strip():
            return None
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            return None
        groups.append((summary.strip(), list(members)))
    return groups


def agentic_chunk(
    propositions: list[Proposition],
    meta: DocumentMeta,
    provider: AgentProvider,
    log: CallRecorder | None = None,
) -> list[Chunk]:
    """Group propositions into summarized chunks via the provider.

    The grouping must be a partition: every proposition appears exactly
    once, in input order, with its text unmodified; violations trigger a
    regeneration. Groups exceeding MAX_PROPOSITIONS_PER_CHUNK are split
    deterministically at the boundary with a logged warning.
    """
    if not propositions:
        return []
    input_texts = [p.text for p in propositions]
    prompt = render_prompt(
        get_template("agentic_group"),
        {"list_of_prop": json.dumps(input_texts, ensure_ascii=False)},
    )
    groups: list[tuple[str, list[str]]] | None = None
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw = provider.complete("agentic_group", prompt)
        call = log.record("agentic_group", prompt, raw) if log is not None else None
        parsed = _parse_groups(raw)
        if parsed is None:
            continue
        flattened = [text for _, members in parsed for text in members]
        if flattened != input_texts:
            logger.warning("grouping altered, lost, or reordered propositions; regenerating")
            continue
        if call is not None:
            call.parsed = f"{len(parsed)} groups"
        groups = parsed
        break
    if groups is None:
        raise StructuredOutputError(f"proposition grouping failed for document {meta.doc_id}")

    # Repair oversize groups by splitting at the cap; the partition and
    # ordering are preserved, only boundaries move.
    repaired: list[tuple[str, list[str]]] = []
    for summary, members in groups:
        if not members:
            continue
        if len(members) > MAX_PROPOSITIONS_PER_CHUNK:
            logger.warning(
                "provider grouped %d propositions (cap %d); splitting deterministically",
                len(members),
                MAX_PROPOSITIONS_PER_CHUNK,
            )
        for start in range(0, len(members), MAX_PROPOSITIONS_PER_CHUNK):
            repaired.append((summary, members[start : start + MAX_PROPOSITIONS_PER_CHUNK]))

    chunks = []
    cursor = 0
    for k, (summary, members) in enumerate(repaired):
        span = (cursor, cursor + len(members))
        cursor += len(members)
        member_props = propositions[span[0] : span[1]]
        chunks.append(
            Chunk(
                id=f"{meta.doc_id}:agentic:{k}",
                text=summary + "\n" + "\n".join(members),
                hazard_type=meta.hazard_type,
                source={
                    "doc_id": meta.doc_id,
                    "proposition_span": [span[0], span[1]],
                    "paragraphs": sorted({p.paragraph_index for p in member_props}),
                },
                strategy=STRATEGY_AGENTIC,
                summary=summary,
            )
        )
    return chunks


# ---------------------------------------------------------------------------
# Document-level strategies
# ---------------------------------------------------------------------------


def chunk_proposition(
    document: Document, provider: AgentProvider, log: CallRecorder | None = None
) -> list[Chunk]:
    """One chunk per extracted proposition, in document order."""
    meta = DocumentMeta.of(document)
    chunks = []
    for paragraph in cleanse(document):
        for j, prop in enumerate(extract_propositions(paragraph, meta, provider, log)):
            chunks.append(
                Chunk(
                    id=f"{document.id}:prop:{paragraph.index}:{j}",
                    text=prop.text,
                    hazard_type=document.hazard_type,
                    source={
                        "doc_id": document.id,
                        "paragraph_index": paragraph.index,
                        "proposition_index": j,
                    },
                    strategy=STRATEGY_PROPOSITION,
                )
            )
    return chunks


def chunk_agentic(
    document: Document, provider: AgentProvider, log: CallRecorder | None = None
) -> list[Chunk]:
    """Extract propositions per paragraph, then group them document-wide."""
    meta = DocumentMeta.of(document)
    propositions: list[Proposition] = []
    for paragraph in cleanse(document):
        propositions.extend(extract_propositions(paragraph, meta, provider, log))
    return agentic_chunk(propositions, meta, provider, log)


def chunk_document(
    document: Document,
    strategy: str,
    provider: AgentProvider | None = None,
    window: int = 200,
    overlap: int = 50,
    tokenizer: Tokenizer | None = None,
    log: CallRecorder | None = None,
) -> list[Chunk]:
    """Chunk a document with the named strategy."""
    if strategy == STRATEGY_FIXED_TOKEN:
        return chunk_fixed_token(document, window=window, overlap=overlap, tokenizer=tokenizer)
    if strategy == STRATEGY_PARAGRAPH:
        return chunk_paragraph(document)
    if strategy in (STRATEGY_PROPOSITION, STRATEGY_AGENTIC):
        if provider is None:
            raise ValueError(f"strategy {strategy!r} requires an agent provider")
        if strategy == STRATEGY_PROPOSITION:
            return chunk_proposition(document, provider, log)
        return chunk_agentic(document, provider, log)
    raise ValueError(f"unknown chunking strategy: {strategy!r}")
