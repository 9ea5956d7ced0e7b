"""Routed retrieval-augmented QA over multi-hazard report corpora.

The library splits report corpora into per-hazard vector databases, routes
each question across them with a probability threshold and proportional
coarse budgets, reranks the pooled candidates, and verifies evidence
sufficiency in a bounded loop with online-search and query-rewrite
fallbacks. A QA dataset builder and an evaluation harness sit on top.
"""

from .agents import (
    FinalAnswer,
    FixtureSearchBackend,
    SearchSnippet,
    SufficiencyVerdict,
    evaluate_sufficiency,
    online_search,
    rewrite_question,
    route,
    write_answer,
)
from .agentic import Proposition, agentic_chunk, chunk_document, extract_propositions
from .chunking import Chunk, WhitespaceTokenizer, chunk_fixed_token, chunk_paragraph
from .documents import Document, DocumentMeta, Paragraph, cleanse
from .embeddings import HTTPEmbeddingProvider, MockEmbeddingProvider, embed
from .evalharness import EvalConfig, EvalReport, ablate, accuracy, evaluate
from .index_io import load_index, save_index
from .pipeline import Backends, InferenceTrace, PipelineConfig, Query, infer, infer_batch
from .providers import HTTPChatProvider, MockRule, ScriptedMockProvider, load_mock_script
from .qagen import QADataset, QAItem, build_dataset, generate_qa, validate_qa
from .rerank import LexicalOverlapScorer, ProviderRerankScorer
from .retrieval import (
    Candidate,
    EvidenceContext,
    RankedEvidence,
    concat_evidence,
    mor_retrieve,
    rerank,
    unified_retrieve,
)
from .routing import ActiveSet, BudgetAllocation, RoutingDistribution, active_set, allocate_budget
from .vecstore import CorpusIndex, HazardDatabase, build_index, coarse_search, cosine

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "Backends",
    "BudgetAllocation",
    "Candidate",
    "Chunk",
    "CorpusIndex",
    "Document",
    "DocumentMeta",
    "EvalConfig",
    "EvalReport",
    "EvidenceContext",
    "FinalAnswer",
    "FixtureSearchBackend",
    "HTTPChatProvider",
    "HTTPEmbeddingProvider",
    "HazardDatabase",
    "InferenceTrace",
    "LexicalOverlapScorer",
    "MockEmbeddingProvider",
    "MockRule",
    "Paragraph",
    "PipelineConfig",
    "Proposition",
    "ProviderRerankScorer",
    "QADataset",
    "QAItem",
    "Query",
    "RankedEvidence",
    "RoutingDistribution",
    "ScriptedMockProvider",
    "SearchSnippet",
    "SufficiencyVerdict",
    "WhitespaceTokenizer",
    "ablate",
    "accuracy",
    "active_set",
    "agentic_chunk",
    "allocate_budget",
    "build_dataset",
    "build_index",
    "chunk_document",
    "chunk_fixed_token",
    "chunk_paragraph",
    "cleanse",
    "coarse_search",
    "concat_evidence",
    "cosine",
    "embed",
    "evaluate",
    "evaluate_sufficiency",
    "extract_propositions",
    "generate_qa",
    "infer",
    "infer_batch",
    "load_index",
    "load_mock_script",
    "mor_retrieve",
    "online_search",
    "rerank",
    "rewrite_question",
    "route",
    "save_index",
    "unified_retrieve",
    "validate_qa",
    "write_answer",
]
