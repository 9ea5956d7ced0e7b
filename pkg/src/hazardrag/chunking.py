"""Chunk records and the deterministic chunking strategies."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .documents import Document, cleanse

STRATEGY_FIXED_TOKEN = "fixed_token"
STRATEGY_PARAGRAPH = "paragraph"
STRATEGY_PROPOSITION = "proposition"
STRATEGY_AGENTIC = "agentic"

CHUNK_STRATEGIES = (
    STRATEGY_FIXED_TOKEN,
    STRATEGY_PARAGRAPH,
    STRATEGY_PROPOSITION,
    STRATEGY_AGENTIC,
)


class ChunkFileError(ValueError):
    """Raised for malformed chunk files."""


class Tokenizer(Protocol):
    mode: str

    def tokenize(self, text: str) -> list[str]: ...


class WhitespaceTokenizer:
    """Deterministic, dependency-free default token unit."""

    mode = "whitespace"

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def count(self, text: str) -> int:
        return len(self.tokenize(text))


@dataclass(frozen=True)
class Chunk:
    """One retrieval unit: text plus provenance.

    `source` always carries a doc_id key; the remaining keys depend on the
    strategy (token spans, paragraph index, or proposition positions).
    Agentic chunks additionally carry a non-empty summary.
    """

    id: str
    text: str
    hazard_type: str
    source: dict
    strategy: str
    summary: str | None = None


def chunk_to_dict(chunk: Chunk) -> dict:
    return {
        "id": chunk.id,
        "text": chunk.text,
        "hazard_type": chunk.hazard_type,
        "source": chunk.source,
        "strategy": chunk.strategy,
        "summary": chunk.summary,
    }


def chunk_from_dict(data: dict) -> Chunk:
    missing = [k for k in ("id", "text", "hazard_type", "source", "strategy") if k not in data]
    if missing:
        raise ChunkFileError(f"chunk missing fields: {', '.join(missing)}")
    if data["strategy"] not in CHUNK_STRATEGIES:
        raise ChunkFileError(f"unknown chunk strategy: {data['strategy']!r}")
    return Chunk(
        id=str(data["id"]),
        text=str(data["text"]),
        hazard_type=str(data["hazard_type"]),
        source=dict(data["source"]),
        strategy=str(data["strategy"]),
        summary=data.get("summary"),
    )


# ---------------------------------------------------------------------------
# Fixed-token strategy
# ---------------------------------------------------------------------------


def fixed_token_spans(
    n_tokens: int, window: int, overlap: int
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Return (core, extended) token spans for a document of `n_tokens`.

    Cores are consecutive disjoint windows covering the token sequence
    exactly once (the last may be short); each extended span adds up to
    `overlap` context tokens on both sides, clipped at the boundaries.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    if not 0 <= overlap < window:
        raise ValueError("overlap must satisfy 0 <= overlap < window")
    spans = []
    for start in range(0, n_tokens, window):
        core = (start, min(start + window, n_tokens))
        extended = (max(0, core[0] - overlap), min(n_tokens, core[1] + overlap))
        spans.append((core, extended))
    return spans


def chunk_fixed_token(
    document: Document,
    window: int = 200,
    overlap: int = 50,
    tokenizer: Tokenizer | None = None,
) -> list[Chunk]:
    """Chunk the content text of `document` into overlapping token windows."""
    tok = tokenizer or WhitespaceTokenizer()
    content = cleanse(document)
    tokens = tok.tokenize("\n".join(p.text for p in content))
    chunks = []
    for core, span in fixed_token_spans(len(tokens), window, overlap):
        chunks.append(
            Chunk(
                id=f"{document.id}:fixed:{core[0]}:{core[1]}",
                text=" ".join(tokens[span[0] : span[1]]),
                hazard_type=document.hazard_type,
                source={
                    "doc_id": document.id,
                    "core": [core[0], core[1]],
                    "span": [span[0], span[1]],
                },
                strategy=STRATEGY_FIXED_TOKEN,
            )
        )
    return chunks


# ---------------------------------------------------------------------------
# Paragraph strategy
# ---------------------------------------------------------------------------


def chunk_paragraph(document: Document) -> list[Chunk]:
    """One chunk per content paragraph, document order preserved."""
    return [
        Chunk(
            id=f"{document.id}:para:{p.index}",
            text=p.text,
            hazard_type=document.hazard_type,
            source={"doc_id": document.id, "paragraph_index": p.index},
            strategy=STRATEGY_PARAGRAPH,
        )
        for p in cleanse(document)
    ]


# ---------------------------------------------------------------------------
# Chunk files (JSON Lines)
# ---------------------------------------------------------------------------


def write_chunks_jsonl(chunks: list[Chunk], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk_to_dict(chunk), ensure_ascii=False) + "\n")


def read_chunks_jsonl(path: str | Path) -> list[Chunk]:
    chunks = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ChunkFileError(f"line {lineno}: invalid JSON") from exc
            try:
                chunks.append(chunk_from_dict(data))
            except ChunkFileError as exc:
                raise ChunkFileError(f"line {lineno}: {exc}") from exc
    return chunks
