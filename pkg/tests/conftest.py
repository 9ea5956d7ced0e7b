"""Shared fixtures: tiny documents, deterministic providers, embedders."""

from __future__ import annotations

import pytest

from hazardrag.documents import Document, make_paragraphs
from hazardrag.embeddings import MockEmbeddingProvider
from hazardrag.providers import ScriptedMockProvider


def make_document(
    doc_id: str = "doc-1",
    hazard: str = "Flood",
    paragraphs: list[str] | None = None,
    year: int = 2001,
    location: str = "Testville",
) -> Document:
    texts = paragraphs if paragraphs is not None else ["First paragraph.", "Second paragraph."]
    return Document(
        id=doc_id,
        title=f"{doc_id} report",
        hazard_type=hazard,
        event_year=year,
        event_location=location,
        body=make_paragraphs(texts),
    )


@pytest.fixture
def embedder() -> MockEmbeddingProvider:
    return MockEmbeddingProvider(dim=64, seed=0)


@pytest.fixture
def flood_doc() -> Document:
    return make_document(
        "flood-1",
        "Flood",
        [
            "The river rose rapidly and inundated the eastern district overnight.",
            "Crews surveyed the levee breach and recorded water marks on buildings.",
        ],
    )


def sequence_provider(agent: str, outputs: list[str], **defaults: str) -> ScriptedMockProvider:
    """Provider answering `agent` from a canned sequence, others from defaults."""
    return ScriptedMockProvider(sequences={agent: outputs}, defaults=defaults)
