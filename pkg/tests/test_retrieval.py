"""Rerank contracts, routed retrieval, and evidence concatenation."""

from __future__ import annotations

import json

import pytest

from hazardrag.agents import make_router
from hazardrag.chunking import Chunk
from hazardrag.hazards import HAZARD_CATEGORIES
from hazardrag.providers import ScriptedMockProvider
from hazardrag.rerank import LexicalOverlapScorer
from hazardrag.retrieval import (
    Candidate,
    RankedEvidence,
    concat_evidence,
    mor_retrieve,
    mor_retrieve_detailed,
    rerank,
    unified_retrieve,
)
from hazardrag.routing import RoutingDistribution
from hazardrag.vecstore import build_index


def make_chunk(cid: str, text: str, hazard: str = "Flood") -> Chunk:
    return Chunk(id=cid, text=text, hazard_type=hazard, source={"doc_id": cid.split(":")[0]}, strategy="paragraph")


def candidates_for(texts: dict, hazard: str = "Flood") -> list[Candidate]:
    return [
        Candidate(chunk=make_chunk(cid, text, hazard), coarse_score=0.5, hazard=hazard)
        for cid, text in texts.items()
    ]


def routing_json(hazard_probs: dict) -> str:
    return json.dumps({h: hazard_probs.get(h, 0.0) for h in HAZARD_CATEGORIES})


def static_router(probs: dict):
    dist = RoutingDistribution({h: probs.get(h, 0.0) for h in HAZARD_CATEGORIES})
    return lambda question: dist


# ---------------------------------------------------------------------------
# rerank
# ---------------------------------------------------------------------------


def test_rerank_saturates_below_k():
    cands = candidates_for({"a": "one", "b": "two", "c": "three"})
    out = rerank(LexicalOverlapScorer(), "one two", cands, k=5)
    assert len(out) == 3
    scores = [s for _, s in out.chunks]
    assert scores == sorted(scores, reverse=True)


def test_planted_keyword_chunk_ranks_first():
    query = "which levee failed during the flood"
    cands = candidates_for(
        {
            "noise1": "unrelated wildfire narrative",
            "planted": "report states which levee failed during the flood event",
            "noise2": "seismic retrofit discussion",
        }
    )
    out = rerank(LexicalOverlapScorer(), query, cands, k=2)
    assert out.ids[0] == "planted"


def test_equal_scores_tie_by_id():
    cands = candidates_for({"b": "same text", "a": "same text", "c": "same text"})
    out = rerank(LexicalOverlapScorer(), "same text", cands, k=3)
    assert out.ids == ["a", "b", "c"]


def test_rerank_requires_positive_k():
    with pytest.raises(ValueError):
        rerank(LexicalOverlapScorer(), "q", [], k=0)


def test_rerank_subset_of_candidates():
    cands = candidates_for({f"c{i}": f"text {i}" for i in range(8)})
    out = rerank(LexicalOverlapScorer(), "text 3", cands, k=4)
    candidate_ids = {c.chunk.id for c in cands}
    assert set(out.ids) <= candidate_ids
    assert len(out.ids) == len(set(out.ids))


def test_scorer_failure_carries_chunk_context():
    class BoomScorer:
        identifier = "boom"

        def score(self, query, text):
            raise RuntimeError("boom")

    cands = candidates_for({"bad": "text"})
    with pytest.raises(RuntimeError, match="bad"):
        rerank(BoomScorer(), "q", cands, k=1)


# ---------------------------------------------------------------------------
# mor_retrieve
# ---------------------------------------------------------------------------


def two_hazard_index(embedder):
    chunks = [
        make_chunk(f"fl:{i}", f"flood levee water report {i}", "Flood") for i in range(6)
    ]
    chunks += [
        make_chunk(f"eq:{i}", f"earthquake shaking ground report {i}", "Earthquake")
        for i in range(6)
    ]
    chunks.append(make_chunk("eq:planted", "the Kelsworth aqueduct ruptured", "Earthquake"))
    return build_index(chunks, embedder)


def test_reduction_to_plain_retrieval(embedder):
    index = two_hazard_index(embedder)
    single = build_index(
        [db_record.chunk for db_record in index.databases["Flood"].records], embedder
    )
    router = static_router({"Flood": 1.0})
    scorer = LexicalOverlapScorer()
    question = "flood levee water report 3"
    routed = mor_retrieve(question, single, router, scorer, embedder, coarse_budget=10, rerank_k=4)
    plain = unified_retrieve(question, single, scorer, embedder, coarse_budget=10, rerank_k=4)
    assert routed.ids == plain.ids


def test_planted_chunk_reachable_in_low_probability_hazard(embedder):
    index = two_hazard_index(embedder)
    router = static_router({"Flood": 0.7, "Earthquake": 0.3})
    out = mor_retrieve(
        "the Kelsworth aqueduct ruptured",
        index,
        router,
        LexicalOverlapScorer(),
        embedder,
        tau=0.2,
        coarse_budget=10,
        rerank_k=3,
    )
    assert out.ids[0] == "eq:planted"


def test_active_hazard_missing_from_index_forfeits_quota(embedder):
    index = two_hazard_index(embedder)
    router = static_router({"Flood": 0.5, "Tsunami": 0.5})
    detailed = mor_retrieve_detailed(
        "flood levee water report",
        index,
        router,
        LexicalOverlapScorer(),
        embedder,
        coarse_budget=10,
        rerank_k=5,
    )
    assert detailed.budget.quotas == {"Tsunami": 5, "Flood": 5}
    assert {c.hazard for c in detailed.candidates} == {"Flood"}
    assert len(detailed.candidates) == 5  # Tsunami's quota is forfeited, not redistributed


def test_mor_uses_router_via_provider(embedder):
    index = two_hazard_index(embedder)
    provider = ScriptedMockProvider(
        defaults={"router": routing_json({"Earthquake": 1.0})}
    )
    out = mor_retrieve(
        "earthquake shaking ground report 2",
        index,
        make_router(provider),
        LexicalOverlapScorer(),
        embedder,
        rerank_k=3,
    )
    assert all(cid.startswith("eq:") for cid in out.ids)
    assert provider.counts_by_agent() == {"router": 1}


def test_empty_index_for_active_hazards_yields_empty_evidence(embedder):
    index = build_index([], embedder)
    out = mor_retrieve(
        "anything", index, static_router({"Flood": 1.0}), LexicalOverlapScorer(), embedder
    )
    assert len(out) == 0
    assert out.ids == []


# ---------------------------------------------------------------------------
# concat_evidence
# ---------------------------------------------------------------------------


def test_concat_empty_evidence():
    ctx = concat_evidence(RankedEvidence(query="q", chunks=()))
    assert ctx.text == ""
    assert ctx.sources == ()


def test_concat_formats_numbered_blocks():
    ev = RankedEvidence(
        query="q",
        chunks=(
            (make_chunk("d1:0", "first text", "Flood"), 0.9),
            (make_chunk("d2:1", "second text", "Earthquake"), 0.5),
        ),
    )
    ctx = concat_evidence(ev)
    lines = ctx.text.splitlines()
    assert lines[0] == "[1] (d1, Flood) first text"
    assert lines[1] == "[2] (d2, Earthquake) second text"
    assert ctx.sources == ("d1:0", "d2:1")


def test_concat_sources_match_input_order():
    ev = RankedEvidence(
        query="q",
        chunks=tuple((make_chunk(f"c{i}", f"t{i}"), 1.0 - i / 10) for i in range(4)),
    )
    assert list(concat_evidence(ev).sources) == ev.ids
