"""Evaluation harness: accuracy, breakdowns, and configuration ablations."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace

from .agents import FinalAnswer
from .chunking import STRATEGY_AGENTIC
from .hazards import HAZARD_CATEGORIES
from .pipeline import Backends, PipelineConfig, Query, infer_batch
from .qagen import QA_CATEGORIES, QA_KINDS, QADataset
from .rerank import RerankScorer
from .vecstore import CorpusIndex

VARIANT_ZERO_SHOT = "zero_shot"
VARIANT_VANILLA_RAG = "vanilla_rag"
VARIANT_MOR_ONLY = "mor_only"
VARIANT_RAG_ONLINE_SEARCH = "rag_online_search"
VARIANT_RAG_REFLECTION = "rag_reflection"
VARIANT_FULL_MORA = "full_mora"

EVAL_VARIANTS = (
    VARIANT_ZERO_SHOT,
    VARIANT_VANILLA_RAG,
    VARIANT_MOR_ONLY,
    VARIANT_RAG_ONLINE_SEARCH,
    VARIANT_RAG_REFLECTION,
    VARIANT_FULL_MORA,
)

# Stage switches per variant: (retrieval, routing, evaluator, search, rewrite).
_VARIANT_STAGES = {
    VARIANT_ZERO_SHOT: (False, False, False, False, False),
    VARIANT_VANILLA_RAG: (True, False, False, False, False),
    VARIANT_MOR_ONLY: (True, True, False, False, False),
    VARIANT_RAG_ONLINE_SEARCH: (True, False, True, True, False),
    VARIANT_RAG_REFLECTION: (True, False, True, False, True),
    VARIANT_FULL_MORA: (True, True, True, True, True),
}


@dataclass(frozen=True)
class EvalConfig:
    """A named pipeline variant plus chunking label and config overrides."""

    name: str
    variant: str
    chunking_strategy: str = STRATEGY_AGENTIC
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in EVAL_VARIANTS:
            raise ValueError(f"unknown pipeline variant: {self.variant!r}")


def pipeline_config_for(cfg: EvalConfig, base: PipelineConfig | None = None) -> PipelineConfig:
    """Translate an eval variant into pipeline stage switches."""
    retrieval, routing, evaluator, search, rewrite = _VARIANT_STAGES[cfg.variant]
    resolved = replace(
        base or PipelineConfig(),
        use_retrieval=retrieval,
        use_routing=routing,
        use_evaluator=evaluator,
        use_search=search,
        use_rewrite=rewrite,
    )
    if cfg.overrides:
        resolved = replace(resolved, **cfg.overrides)
    return resolved


@dataclass(frozen=True)
class ItemRecord:
    question_id: str
    kind: str
    category: str
    hazard: str
    predicted: str | None
    gold: str
    correct: bool
    latency: float
    evidence_source: str


@dataclass
class EvalReport:
    config: EvalConfig
    overall_accuracy: float
    accuracy_by_category: dict
    accuracy_by_kind: dict
    accuracy_by_hazard: dict
    mean_latency: float
    median_latency: float
    abstentions: int
    items: list[ItemRecord]


@dataclass
class AblationReport:
    """Per-config reports plus accuracy/latency deltas vs the baseline."""

    reports: list[EvalReport]
    deltas: list[dict]


def accuracy(predictions: list[FinalAnswer], golds: list[str]) -> float:
    """Mean exact-match correctness; abstentions count as incorrect."""
    if len(predictions) != len(golds):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds"
        )
    if not golds:
        return 0.0
    correct = sum(1 for pred, gold in zip(predictions, golds) if pred.value == gold)
    return correct / len(golds)


def _breakdown(items: list[ItemRecord], keys: tuple[str, ...], attr: str) -> dict:
    out = {}
    for key in keys:
        bucket = [it for it in items if getattr(it, attr) == key]
        correct = sum(1 for it in bucket if it.correct)
        out[key] = {
            "count": len(bucket),
            "correct": correct,
            "accuracy": correct / len(bucket) if bucket else None,
        }
    return out


def evaluate(
    dataset: QADataset,
    cfg: EvalConfig,
    index: CorpusIndex,
    backends: Backends,
    scorer: RerankScorer,
    parallelism: int = 1,
    base_config: PipelineConfig | None = None,
) -> EvalReport:
    """Run every dataset item through the configured pipeline variant."""
    pcfg = pipeline_config_for(cfg, base_config)
    queries = [Query(text=item.prompt_text(), kind=item.kind) for item in dataset.items]
    results = infer_batch(queries, index, pcfg, backends, scorer, parallelism)
    records = []
    for item, (answer, trace) in zip(dataset.items, results):
        records.append(
            ItemRecord(
                question_id=item.id,
                kind=item.kind,
                category=item.category,
                hazard=item.provenance.hazard_type,
                predicted=answer.value,
                gold=item.gold,
                correct=answer.value == item.gold,
                latency=trace.total_latency,
                evidence_source=trace.evidence_source,
            )
        )
    latencies = [r.latency for r in records]
    correct = sum(1 for r in records if r.correct)
    return EvalReport(
        config=cfg,
        overall_accuracy=correct / len(records) if records else 0.0,
        accuracy_by_category=_breakdown(records, QA_CATEGORIES, "category"),
        accuracy_by_kind=_breakdown(records, QA_KINDS, "kind"),
        accuracy_by_hazard=_breakdown(records, HAZARD_CATEGORIES, "hazard"),
        mean_latency=statistics.fmean(latencies) if latencies else 0.0,
        median_latency=statistics.median(latencies) if latencies else 0.0,
        abstentions=sum(1 for r in records if r.predicted is None),
        items=records,
    )


def ablate(
    dataset: QADataset,
    configs: list[EvalConfig],
    indexes: CorpusIndex | list[CorpusIndex],
    backends: Backends,
    scorer: RerankScorer,
    parallelism: int = 1,
    base_config: PipelineConfig | None = None,
) -> AblationReport:
    """Evaluate several configs; the first is the baseline for deltas.

    `indexes` is a single shared index or one per config (e.g. when the
    configs differ in chunking strategy).
    """
    if len(configs) < 2:
        raise ValueError("ablation requires at least 2 configs")
    if isinstance(indexes, CorpusIndex):
        index_list = [indexes] * len(configs)
    else:
        if len(indexes) != len(configs):
            raise ValueError("one index required per config")
        index_list = list(indexes)
    reports = [
        evaluate(dataset, cfg, idx, backends, scorer, parallelism, base_config)
        for cfg, idx in zip(configs, index_list)
    ]
    baseline = reports[0]
    deltas = [
        {
            "name": report.config.name,
            "accuracy": report.overall_accuracy,
            "accuracy_delta": report.overall_accuracy - baseline.overall_accuracy,
            "mean_latency": report.mean_latency,
            "latency_delta": report.mean_latency - baseline.mean_latency,
        }
        for report in reports
    ]
    return AblationReport(reports=reports, deltas=deltas)
