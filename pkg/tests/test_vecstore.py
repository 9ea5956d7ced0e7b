"""Embedding contracts, cosine math, index building, exact coarse search."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazardrag.chunking import Chunk
from hazardrag.embeddings import MockEmbeddingProvider, embed
from hazardrag.vecstore import (
    CorpusIndex,
    DimensionMismatchError,
    DuplicateChunkIdError,
    HazardDatabase,
    ZeroVectorError,
    build_index,
    coarse_search,
    cosine,
    unified_coarse_search,
)

from oracles import brute_force_top_ids, random_database


def make_chunk(cid: str, text: str, hazard: str = "Flood") -> Chunk:
    return Chunk(id=cid, text=text, hazard_type=hazard, source={"doc_id": "d"}, strategy="paragraph")


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------


def test_mock_embedding_is_deterministic(embedder):
    a = embed(embedder, "levee breach near the river")
    b = embed(embedder, "levee breach near the river")
    assert np.array_equal(a, b)
    assert a.dtype == np.float32


def test_embedding_has_provider_dimension():
    provider = MockEmbeddingProvider(dim=1536, seed=0)
    assert embed(provider, "a sentence").shape == (1536,)


def test_empty_text_rejected(embedder):
    with pytest.raises(ValueError):
        embed(embedder, "")
    with pytest.raises(ValueError):
        embed(embedder, "   ")


def test_token_overlap_raises_similarity(embedder):
    base = embed(embedder, "the levee failed during the flood")
    close = embed(embedder, "the levee failed during the storm")
    far = embed(embedder, "unrelated words entirely different topic")
    assert cosine(base, close) > cosine(base, far)


# ---------------------------------------------------------------------------
# cosine
# ---------------------------------------------------------------------------


def test_cosine_self_similarity():
    v = np.array([0.3, -1.2, 2.0])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)


def test_cosine_orthogonal_and_scale():
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    assert cosine(e1, e2) == pytest.approx(0.0, abs=1e-9)
    v = np.array([0.5, -2.0, 1.0])
    assert cosine(v, 3.0 * v) == pytest.approx(1.0, abs=1e-9)


def test_cosine_errors():
    with pytest.raises(ZeroVectorError):
        cosine([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(
    values=st.lists(
        st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=2, max_size=16
    ),
    scale=st.floats(min_value=0.01, max_value=50),
    data=st.data(),
)
def test_cosine_symmetry_and_scale_invariance(values, scale, data):
    a = np.array(values)
    b = np.array(data.draw(st.lists(st.floats(-100, 100), min_size=len(values), max_size=len(values))))
    if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0:
        return
    assert cosine(a, b) == pytest.approx(cosine(b, a), abs=1e-12)
    assert cosine(scale * a, b) == pytest.approx(cosine(a, b), abs=1e-9)


# ---------------------------------------------------------------------------
# build_index
# ---------------------------------------------------------------------------


def test_build_index_partitions_by_hazard(embedder):
    chunks = [make_chunk(f"f{i}", f"flood text {i}", "Flood") for i in range(4)]
    chunks += [make_chunk(f"e{i}", f"earthquake text {i}", "Earthquake") for i in range(2)]
    index = build_index(chunks, embedder)
    assert set(index.databases) == {"Flood", "Earthquake"}
    assert len(index.databases["Flood"]) == 4
    assert len(index.databases["Earthquake"]) == 2
    assert index.total_chunks == len(chunks)
    assert index.embedder_id == embedder.identifier


def test_empty_index_is_valid(embedder):
    index = build_index([], embedder)
    assert index.databases == {}
    assert index.total_chunks == 0


def test_duplicate_chunk_id_rejected(embedder):
    chunks = [make_chunk("same", "a"), make_chunk("same", "b")]
    with pytest.raises(DuplicateChunkIdError, match="same"):
        build_index(chunks, embedder)


def test_zero_vector_rejected_at_insert():
    chunk = make_chunk("z", "text")
    with pytest.raises(ZeroVectorError, match="z"):
        HazardDatabase("Flood", [chunk], np.zeros((1, 4), dtype=np.float32))


@settings(max_examples=20, deadline=None)
@given(counts=st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=4))
def test_index_preserves_chunk_multiplicity(counts):
    hazards = ["Flood", "Earthquake", "Storm", "Tsunami"]
    embedder = MockEmbeddingProvider(dim=16, seed=1)
    chunks = []
    for h, n in zip(hazards, counts):
        chunks += [make_chunk(f"{h}-{i}", f"{h} text {i}", h) for i in range(n)]
    index = build_index(chunks, embedder)
    assert sum(len(db) for db in index.databases.values()) == len(chunks)


# ---------------------------------------------------------------------------
# coarse_search
# ---------------------------------------------------------------------------


def test_l_zero_returns_empty(embedder):
    db = random_database(np.random.default_rng(0), "Flood", 10, 8)
    assert coarse_search(db, np.ones(8), 0) == []


def test_l_saturates_at_database_size():
    rng = np.random.default_rng(1)
    db = random_database(rng, "Flood", 7, 8)
    query = rng.standard_normal(8)
    results = coarse_search(db, query, 99)
    assert len(results) == 7
    scores = [s for _, s in results]
    assert scores == sorted(scores, reverse=True)


def test_matches_brute_force_oracle_on_random_database():
    rng = np.random.default_rng(2)
    db = random_database(rng, "Flood", 1000, 24)
    query = rng.standard_normal(24)
    got = [c.id for c, _ in coarse_search(db, query, 50)]
    assert got == brute_force_top_ids(db, query, 50)


def test_tie_break_by_chunk_id_with_duplicate_vectors():
    vec = np.array([[1.0, 2.0], [1.0, 2.0], [2.0, -1.0]], dtype=np.float32)
    chunks = [make_chunk("b", "x"), make_chunk("a", "y"), make_chunk("c", "z")]
    db = HazardDatabase("Flood", chunks, vec)
    got = [c.id for c, _ in coarse_search(db, np.array([1.0, 2.0]), 3)]
    assert got == ["a", "b", "c"]
    assert got == brute_force_top_ids(db, np.array([1.0, 2.0]), 3)


def test_query_dim_and_zero_checks():
    db = random_database(np.random.default_rng(3), "Flood", 5, 8)
    with pytest.raises(DimensionMismatchError):
        coarse_search(db, np.ones(9), 3)
    with pytest.raises(ZeroVectorError):
        coarse_search(db, np.zeros(8), 3)
    with pytest.raises(ValueError):
        coarse_search(db, np.ones(8), -1)


def test_unified_search_equals_merged_per_hazard(embedder):
    chunks = [make_chunk(f"f{i}", f"river flood water {i}", "Flood") for i in range(6)]
    chunks += [make_chunk(f"e{i}", f"ground shaking event {i}", "Earthquake") for i in range(6)]
    index = build_index(chunks, embedder)
    query = embed(embedder, "river flood water")
    merged = unified_coarse_search(index, query, 5)
    assert len(merged) == 5
    # oracle: score every chunk individually, sort with the same tie rule
    scored = []
    for db in index.databases.values():
        for record in db.records:
            scored.append((cosine(record.vector, query), record.chunk.id))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    assert [c.id for c, _ in merged] == [cid for _, cid in scored[:5]]


def test_corpus_index_rejects_mismatched_dims(embedder):
    db = random_database(np.random.default_rng(4), "Flood", 3, 8)
    with pytest.raises(DimensionMismatchError):
        CorpusIndex(databases={"Flood": db}, embedder_id="x", dim=16)
