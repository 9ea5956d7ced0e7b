"""Two-stage retrieval: routed per-hazard coarse search plus global rerank."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .chunking import Chunk
from .embeddings import EmbeddingProvider, embed
from .rerank import RerankScorer
from .routing import (
    DEFAULT_COARSE_BUDGET,
    DEFAULT_TAU,
    ActiveSet,
    BudgetAllocation,
    RoutingDistribution,
    active_set,
    allocate_budget,
)
from .vecstore import CorpusIndex, coarse_search, unified_coarse_search

DEFAULT_RERANK_K = 5

# A router turns a question into a distribution over hazards; the agents
# module provides the provider-backed implementation.
Router = Callable[[str], RoutingDistribution]


@dataclass(frozen=True)
class Candidate:
    """One coarse-stage survivor, tagged with the database it came from."""

    chunk: Chunk
    coarse_score: float
    hazard: str


@dataclass(frozen=True)
class RankedEvidence:
    """Reranked chunks for a query, scores non-increasing, length <= K."""

    query: str
    chunks: tuple[tuple[Chunk, float], ...]

    @property
    def ids(self) -> list[str]:
        return [chunk.id for chunk, _ in self.chunks]

    def __len__(self) -> int:
        return len(self.chunks)


@dataclass(frozen=True)
class EvidenceContext:
    """Numbered evidence blocks ready for prompting, plus their sources."""

    text: str
    sources: tuple[str, ...]

    @classmethod
    def empty(cls) -> "EvidenceContext":
        return cls(text="", sources=())


@dataclass(frozen=True)
class MorResult:
    """Full record of one routed retrieval, for tracing."""

    evidence: RankedEvidence
    routing: RoutingDistribution
    active: ActiveSet
    budget: BudgetAllocation
    candidates: tuple[Candidate, ...]


def rerank(
    scorer: RerankScorer,
    query: str,
    candidates: list[Candidate],
    k: int = DEFAULT_RERANK_K,
) -> RankedEvidence:
    """Select the top-k candidates by scorer, ties broken by chunk id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    scored: list[tuple[float, Candidate]] = []
    for cand in candidates:
        try:
            score = float(scorer.score(query, cand.chunk.text))
        except Exception as exc:
            raise RuntimeError(f"rerank scorer failed on chunk {cand.chunk.id!r}") from exc
        scored.append((score, cand))
    scored.sort(key=lambda pair: (-pair[0], pair[1].chunk.id))
    top = scored[: min(k, len(scored))]
    return RankedEvidence(query=query, chunks=tuple((c.chunk, s) for s, c in top))


def mor_retrieve_detailed(
    question: str,
    index: CorpusIndex,
    router: Router,
    scorer: RerankScorer,
    embedder: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    coarse_budget: int = DEFAULT_COARSE_BUDGET,
    rerank_k: int = DEFAULT_RERANK_K,
) -> MorResult:
    """Routed retrieval with the intermediate routing state exposed.

    Route, threshold, apportion the coarse budget, search each active
    hazard database under its quota, then rerank the union. Active hazards
    missing from the index forfeit their quota.
    """
    dist = router(question)
    active = active_set(dist, tau)
    budget = allocate_budget(dist, active, coarse_budget)
    query_vec = embed(embedder, question)
    candidates: list[Candidate] = []
    for hazard in active.hazards:
        quota = budget.quotas.get(hazard, 0)
        db = index.databases.get(hazard)
        if quota <= 0 or db is None:
            continue
        for chunk, score in coarse_search(db, query_vec, quota):
            candidates.append(Candidate(chunk=chunk, coarse_score=score, hazard=hazard))
    evidence = rerank(scorer, question, candidates, rerank_k)
    return MorResult(
        evidence=evidence,
        routing=dist,
        active=active,
        budget=budget,
        candidates=tuple(candidates),
    )


def mor_retrieve(
    question: str,
    index: CorpusIndex,
    router: Router,
    scorer: RerankScorer,
    embedder: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    coarse_budget: int = DEFAULT_COARSE_BUDGET,
    rerank_k: int = DEFAULT_RERANK_K,
) -> RankedEvidence:
    """Routed two-stage retrieval; see mor_retrieve_detailed."""
    return mor_retrieve_detailed(
        question, index, router, scorer, embedder, tau, coarse_budget, rerank_k
    ).evidence


def unified_retrieve(
    question: str,
    index: CorpusIndex,
    scorer: RerankScorer,
    embedder: EmbeddingProvider,
    coarse_budget: int = DEFAULT_COARSE_BUDGET,
    rerank_k: int = DEFAULT_RERANK_K,
) -> RankedEvidence:
    """Unrouted two-stage retrieval over all hazards merged into one pool."""
    query_vec = embed(embedder, question)
    candidates = [
        Candidate(chunk=chunk, coarse_score=score, hazard=chunk.hazard_type)
        for chunk, score in unified_coarse_search(index, query_vec, coarse_budget)
    ]
    return rerank(scorer, question, candidates, rerank_k)


def concat_evidence(evidence: RankedEvidence) -> EvidenceContext:
    """Format ranked chunks as numbered blocks: "[i] (doc_id, hazard) text"."""
    blocks = []
    sources = []
    for i, (chunk, _score) in enumerate(evidence.chunks, start=1):
        doc_id = chunk.source.get("doc_id", "?")
        blocks.append(f"[{i}] ({doc_id}, {chunk.hazard_type}) {chunk.text}")
        sources.append(chunk.id)
    return EvidenceContext(text="\n".join(blocks), sources=tuple(sources))
