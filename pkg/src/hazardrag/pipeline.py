"""The bounded retrieve-evaluate-search-rewrite loop with answer fallback."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

from .agents import (
    KIND_TRUE_FALSE,
    FinalAnswer,
    SearchBackend,
    SufficiencyVerdict,
    evaluate_sufficiency,
    make_router,
    online_search,
    rewrite_question,
    write_answer,
)
from .chunking import chunk_from_dict, chunk_to_dict
from .embeddings import EmbeddingProvider
from .providers import AgentCall, AgentProvider, CallRecorder
from .rerank import RerankScorer
from .retrieval import (
    EvidenceContext,
    RankedEvidence,
    concat_evidence,
    mor_retrieve_detailed,
    unified_retrieve,
)
from .routing import RoutingDistribution
from .vecstore import CorpusIndex

logger = logging.getLogger(__name__)

TRACE_VERSION = 1

SOURCE_CORPUS = "corpus"
SOURCE_ONLINE = "online"
SOURCE_NONE = "none"


class TraceFormatError(ValueError):
    """Raised when a serialized trace cannot be parsed."""


@dataclass(frozen=True)
class PipelineConfig:
    """Loop bounds, retrieval knobs, and per-variant stage switches."""

    max_iterations: int = 5
    tau: float = 0.2
    coarse_budget: int = 50
    rerank_k: int = 5
    search_n: int = 5
    use_retrieval: bool = True
    use_routing: bool = True
    use_evaluator: bool = True
    use_search: bool = True
    use_rewrite: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class Backends:
    """The model and search handles one inference run talks to."""

    provider: AgentProvider
    embedder: EmbeddingProvider
    search: SearchBackend | None = None


@dataclass(frozen=True)
class Query:
    text: str
    kind: str = KIND_TRUE_FALSE


@dataclass
class IterationRecord:
    t: int
    query_used: str
    routing: RoutingDistribution | None
    evidence: RankedEvidence
    corpus_verdict: SufficiencyVerdict
    search_context: EvidenceContext | None = None
    search_verdict: SufficiencyVerdict | None = None
    rewritten_to: str | None = None
    rewrite_no_progress: bool | None = None
    wall_time: float = 0.0


@dataclass
class InferenceTrace:
    question: str
    iterations: list[IterationRecord]
    evidence_source: str
    final_answer: FinalAnswer
    total_latency: float
    agent_calls: list[AgentCall] = field(default_factory=list)
    error: str | None = None


def infer(
    question: str,
    index: CorpusIndex,
    cfg: PipelineConfig,
    backends: Backends,
    scorer: RerankScorer,
    kind: str = KIND_TRUE_FALSE,
) -> tuple[FinalAnswer, InferenceTrace]:
    """Run the verification loop for one question and answer it.

    Per iteration: retrieve (routed or unified), check corpus-evidence
    sufficiency, fall back to online search and check again, else rewrite
    the query and continue. Accepted evidence ends the loop; the answer is
    generated from the current (possibly rewritten) query, grounded when
    evidence was accepted and as an ungrounded fallback otherwise.
    """
    log = CallRecorder()
    run_start = perf_counter()
    iterations: list[IterationRecord] = []
    final_context: EvidenceContext | None = None
    source = SOURCE_NONE
    query = question

    if cfg.use_retrieval:
        router = make_router(backends.provider, log) if cfg.use_routing else None
        for t in range(1, cfg.max_iterations + 1):
            iter_start = perf_counter()
            if cfg.use_routing:
                mor = mor_retrieve_detailed(
                    query,
                    index,
                    router,
                    scorer,
                    backends.embedder,
                    tau=cfg.tau,
                    coarse_budget=cfg.coarse_budget,
                    rerank_k=cfg.rerank_k,
                )
                evidence, routing = mor.evidence, mor.routing
            else:
                evidence = unified_retrieve(
                    query,
                    index,
                    scorer,
                    backends.embedder,
                    coarse_budget=cfg.coarse_budget,
                    rerank_k=cfg.rerank_k,
                )
                routing = None
            context = concat_evidence(evidence)
            if cfg.use_evaluator:
                corpus_verdict = evaluate_sufficiency(backends.provider, query, context, log)
            else:
                corpus_verdict = SufficiencyVerdict(sufficient=True, raw="(evaluator disabled)")
            record = IterationRecord(
                t=t,
                query_used=query,
                routing=routing,
                evidence=evidence,
                corpus_verdict=corpus_verdict,
            )

            if corpus_verdict.sufficient:
                final_context, source = context, SOURCE_CORPUS
                record.wall_time = round(perf_counter() - iter_start, 3)
                iterations.append(record)
                break

            if cfg.use_search and backends.search is not None:
                search_context = online_search(backends.search, query, cfg.search_n, log)
                search_verdict = evaluate_sufficiency(
                    backends.provider, query, search_context, log
                )
                record.search_context = search_context
                record.search_verdict = search_verdict
                if search_verdict.sufficient:
                    final_context, source = search_context, SOURCE_ONLINE
                    record.wall_time = round(perf_counter() - iter_start, 3)
                    iterations.append(record)
                    break

            if cfg.use_rewrite and t < cfg.max_iterations:
                rewritten = rewrite_question(backends.provider, query, context, log)
                record.rewritten_to = rewritten
                record.rewrite_no_progress = rewritten == query
                record.wall_time = round(perf_counter() - iter_start, 3)
                iterations.append(record)
                query = rewritten
                continue

            record.wall_time = round(perf_counter() - iter_start, 3)
            iterations.append(record)
            if not cfg.use_rewrite:
                break  # nothing can change between iterations

    answer = write_answer(backends.provider, query, kind, final_context, log)
    trace = InferenceTrace(
        question=question,
        iterations=iterations,
        evidence_source=source,
        final_answer=answer,
        total_latency=round(perf_counter() - run_start, 3),
        agent_calls=log.calls,
    )
    return answer, trace


def infer_batch(
    queries: list[Query],
    index: CorpusIndex,
    cfg: PipelineConfig,
    backends: Backends,
    scorer: RerankScorer,
    parallelism: int = 1,
) -> list[tuple[FinalAnswer, InferenceTrace]]:
    """Run independent inference loops, preserving input order.

    One item's failure never aborts the batch; it becomes an abstention
    with the error recorded in its trace.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")

    def one(query: Query) -> tuple[FinalAnswer, InferenceTrace]:
        try:
            return infer(query.text, index, cfg, backends, scorer, kind=query.kind)
        except Exception as exc:
            logger.warning("inference failed for %r: %s", query.text[:60], exc)
            answer = FinalAnswer(kind=query.kind, value=None, grounded=False)
            trace = InferenceTrace(
                question=query.text,
                iterations=[],
                evidence_source=SOURCE_NONE,
                final_answer=answer,
                total_latency=0.0,
                error=str(exc),
            )
            return answer, trace

    if parallelism == 1:
        return [one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, queries))


# ---------------------------------------------------------------------------
# Trace serialization (version 1)
# ---------------------------------------------------------------------------


def _evidence_to_dict(evidence: RankedEvidence) -> dict:
    return {
        "query": evidence.query,
        "chunks": [
            {"chunk": chunk_to_dict(chunk), "score": score} for chunk, score in evidence.chunks
        ],
    }


def _evidence_from_dict(data: dict) -> RankedEvidence:
    return RankedEvidence(
        query=data["query"],
        chunks=tuple(
            (chunk_from_dict(entry["chunk"]), float(entry["score"]))
            for entry in data["chunks"]
        ),
    )


def _context_to_dict(context: EvidenceContext | None) -> dict | None:
    if context is None:
        return None
    return {"text": context.text, "sources": list(context.sources)}


def _context_from_dict(data: dict | None) -> EvidenceContext | None:
    if data is None:
        return None
    return EvidenceContext(text=data["text"], sources=tuple(data["sources"]))


def _verdict_to_dict(verdict: SufficiencyVerdict | None) -> dict | None:
    if verdict is None:
        return None
    return {"sufficient": verdict.sufficient, "raw": verdict.raw}


def _verdict_from_dict(data: dict | None) -> SufficiencyVerdict | None:
    if data is None:
        return None
    return SufficiencyVerdict(sufficient=bool(data["sufficient"]), raw=data["raw"])


def trace_to_dict(trace: InferenceTrace) -> dict:
    return {
        "version": TRACE_VERSION,
        "question": trace.question,
        "evidence_source": trace.evidence_source,
        "final_answer": {
            "kind": trace.final_answer.kind,
            "value": trace.final_answer.value,
            "grounded": trace.final_answer.grounded,
        },
        "total_latency": trace.total_latency,
        "error": trace.error,
        "iterations": [
            {
                "t": rec.t,
                "query_used": rec.query_used,
                "routing": rec.routing.to_dict() if rec.routing is not None else None,
                "evidence": _evidence_to_dict(rec.evidence),
                "corpus_verdict": _verdict_to_dict(rec.corpus_verdict),
                "search_context": _context_to_dict(rec.search_context),
                "search_verdict": _verdict_to_dict(rec.search_verdict),
                "rewritten_to": rec.rewritten_to,
                "rewrite_no_progress": rec.rewrite_no_progress,
                "wall_time": rec.wall_time,
            }
            for rec in trace.iterations
        ],
        "agent_calls": [
            {
                "agent": call.agent,
                "prompt_sha256": call.prompt_sha256,
                "raw": call.raw,
                "parsed": call.parsed,
            }
            for call in trace.agent_calls
        ],
    }


def trace_from_dict(data: dict) -> InferenceTrace:
    if not isinstance(data, dict):
        raise TraceFormatError("trace must be a JSON object")
    version = data.get("version")
    if version != TRACE_VERSION:
        raise TraceFormatError(
            f"unsupported trace version {version!r} (supported: {TRACE_VERSION})"
        )
    try:
        answer_data = data["final_answer"]
        answer = FinalAnswer(
            kind=answer_data["kind"],
            value=answer_data["value"],
            grounded=bool(answer_data["grounded"]),
        )
        iterations = [
            IterationRecord(
                t=int(rec["t"]),
                query_used=rec["query_used"],
                routing=(
                    RoutingDistribution(rec["routing"]) if rec["routing"] is not None else None
                ),
                evidence=_evidence_from_dict(rec["evidence"]),
                corpus_verdict=_verdict_from_dict(rec["corpus_verdict"]),
                search_context=_context_from_dict(rec["search_context"]),
                search_verdict=_verdict_from_dict(rec["search_verdict"]),
                rewritten_to=rec["rewritten_to"],
                rewrite_no_progress=rec["rewrite_no_progress"],
                wall_time=float(rec["wall_time"]),
            )
            for rec in data["iterations"]
        ]
        agent_calls = [
            AgentCall(
                agent=call["agent"],
                prompt_sha256=call["prompt_sha256"],
                raw=call["raw"],
                parsed=call["parsed"],
            )
            for call in data["agent_calls"]
        ]
        return InferenceTrace(
            question=data["question"],
            iterations=iterations,
            evidence_source=data["evidence_source"],
            final_answer=answer,
            total_latency=float(data["total_latency"]),
            agent_calls=agent_calls,
            error=data.get("error"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceFormatError(f"malformed trace: {exc}") from exc


def save_trace(trace: InferenceTrace, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(trace_to_dict(trace), ensure_ascii=False) + "\n", encoding="utf-8"
    )


def save_traces_jsonl(traces: list[InferenceTrace], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(json.dumps(trace_to_dict(trace), ensure_ascii=False) + "\n")


def load_traces_jsonl(path: str | Path) -> list[InferenceTrace]:
    traces = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                traces.append(trace_from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"line {lineno}: invalid JSON") from exc
    return traces
