"""Fixed-token and paragraph chunking, with an independent span oracle."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazardrag.chunking import (
    ChunkFileError,
    WhitespaceTokenizer,
    chunk_fixed_token,
    chunk_from_dict,
    chunk_paragraph,
    chunk_to_dict,
    fixed_token_spans,
    read_chunks_jsonl,
    write_chunks_jsonl,
)

from conftest import make_document


def token_document(n_tokens: int, doc_id: str = "tok-doc"):
    text = " ".join(f"t{i}" for i in range(n_tokens))
    return make_document(doc_id, paragraphs=[text] if n_tokens else [])


# ---------------------------------------------------------------------------
# Oracle: per-token membership, computed independently of the construction
# ---------------------------------------------------------------------------


def oracle_core_of_token(t: int, window: int) -> tuple[int, int]:
    start = (t // window) * window
    return start, start + window


def assert_spans_match_oracle(n: int, window: int, overlap: int):
    spans = fixed_token_spans(n, window, overlap)
    # every token belongs to exactly one core
    for t in range(n):
        owners = [i for i, (core, _) in enumerate(spans) if core[0] <= t < core[1]]
        assert owners == [t // window]
        core_start, _ = oracle_core_of_token(t, window)
        assert spans[t // window][0][0] == core_start
    # extended spans are the cores widened by `overlap`, clipped
    for core, ext in spans:
        assert ext == (max(0, core[0] - overlap), min(n, core[1] + overlap))
    # cores tile [0, n) exactly
    covered = [t for core, _ in spans for t in range(core[0], core[1])]
    assert covered == list(range(n))


def test_spec_example_500_tokens():
    spans = fixed_token_spans(500, 200, 50)
    assert [core for core, _ in spans] == [(0, 200), (200, 400), (400, 500)]
    assert [ext for _, ext in spans] == [(0, 250), (150, 450), (350, 500)]
    assert_spans_match_oracle(500, 200, 50)


def test_single_window_document():
    doc = token_document(200)
    chunks = chunk_fixed_token(doc)
    assert len(chunks) == 1
    assert chunks[0].source["core"] == [0, 200]
    assert chunks[0].source["span"] == [0, 200]
    assert chunks[0].text == " ".join(f"t{i}" for i in range(200))


def test_empty_document_yields_no_chunks():
    assert chunk_fixed_token(token_document(0)) == []


def test_fixed_token_chunk_fields():
    doc = token_document(500)
    chunks = chunk_fixed_token(doc)
    assert [c.id for c in chunks] == [
        "tok-doc:fixed:0:200",
        "tok-doc:fixed:200:400",
        "tok-doc:fixed:400:500",
    ]
    assert chunks[1].text.split() == [f"t{i}" for i in range(150, 450)]
    assert all(c.strategy == "fixed_token" for c in chunks)
    assert all(c.hazard_type == "Flood" for c in chunks)


def test_window_and_overlap_preconditions():
    doc = token_document(10)
    with pytest.raises(ValueError):
        chunk_fixed_token(doc, window=0)
    with pytest.raises(ValueError):
        chunk_fixed_token(doc, window=10, overlap=10)
    with pytest.raises(ValueError):
        chunk_fixed_token(doc, window=10, overlap=-1)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(min_value=0, max_value=5000))
def test_cores_partition_every_document(n):
    assert_spans_match_oracle(n, 200, 50)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=2000),
    window=st.integers(min_value=1, max_value=300),
    data=st.data(),
)
def test_cores_partition_for_arbitrary_windows(n, window, data):
    overlap = data.draw(st.integers(min_value=0, max_value=window - 1))
    assert_spans_match_oracle(n, window, overlap)


def test_whitespace_tokenizer_round_trip():
    tok = WhitespaceTokenizer()
    text = "alpha  beta\n gamma\tdelta"
    tokens = tok.tokenize(text)
    assert tokens == ["alpha", "beta", "gamma", "delta"]
    assert tok.count(text) == 4
    assert " ".join(tokens).split() == tokens


# ---------------------------------------------------------------------------
# Paragraph strategy
# ---------------------------------------------------------------------------


def test_paragraph_chunks_are_a_bijection():
    texts = [f"Content paragraph number {i}." for i in range(9)]
    doc = make_document("para-doc", paragraphs=texts)
    chunks = chunk_paragraph(doc)
    assert len(chunks) == 9
    assert [c.text for c in chunks] == texts
    assert [c.source["paragraph_index"] for c in chunks] == list(range(9))


def test_paragraph_chunks_skip_noncontent():
    texts = [
        "Real observation one.",
        "Table of Contents\n1. Intro",
        "Real observation two.",
        "References\n[1] Author, A. (2000). Title.",
    ]
    doc = make_document("mixed-doc", paragraphs=texts)
    chunks = chunk_paragraph(doc)
    assert len(chunks) == 2
    assert [c.source["paragraph_index"] for c in chunks] == [0, 2]


# ---------------------------------------------------------------------------
# Chunk files
# ---------------------------------------------------------------------------


def test_chunk_jsonl_round_trip(tmp_path):
    doc = make_document("io-doc", paragraphs=["First paragraph.", "Second paragraph."])
    chunks = chunk_paragraph(doc)
    path = tmp_path / "chunks.jsonl"
    write_chunks_jsonl(chunks, path)
    assert read_chunks_jsonl(path) == chunks


def test_chunk_dict_round_trip():
    doc = make_document("d", paragraphs=["Text."])
    chunk = chunk_paragraph(doc)[0]
    assert chunk_from_dict(chunk_to_dict(chunk)) == chunk


def test_chunk_file_errors(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n", encoding="utf-8")
    with pytest.raises(ChunkFileError, match="line 1"):
        read_chunks_jsonl(bad)
    bad.write_text('{"id": "x"}\n', encoding="utf-8")
    with pytest.raises(ChunkFileError, match="missing fields"):
        read_chunks_jsonl(bad)
