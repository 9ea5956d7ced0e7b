"""The agent roles: routing, sufficiency, search, rewriting, answering.

Each role renders its template, calls the provider, and parses the output
under a strict contract with bounded regeneration retries and a safe
role-specific fallback, so every role is total.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .hazards import HAZARD_CATEGORIES
from .prompts import get_template, render_prompt
from .providers import MAX_PARSE_RETRIES, AgentProvider, CallRecorder
from .retrieval import EvidenceContext
from .routing import RoutingDistribution

logger = logging.getLogger(__name__)

KIND_TRUE_FALSE = "true_false"
KIND_MULTIPLE_CHOICE = "multiple_choice"
ANSWER_KINDS = (KIND_TRUE_FALSE, KIND_MULTIPLE_CHOICE)

MAX_SEARCH_SNIPPETS = 5

# Router outputs whose probabilities sum inside this window are trusted and
# renormalized; anything outside is treated as unreliable and regenerated.
ROUTER_SUM_WINDOW = (0.8, 1.2)

_PUNCT_STRIP = " \t\r\n.,;:!?'\"`"


@dataclass(frozen=True)
class SufficiencyVerdict:
    sufficient: bool
    raw: str


@dataclass(frozen=True)
class FinalAnswer:
    """Parsed answer token; value None records an abstention."""

    kind: str
    value: str | None
    grounded: bool

    @property
    def abstained(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class SearchSnippet:
    text: str
    source_url: str
    rank: int


class SearchBackend(Protocol):
    identifier: str

    def search(self, query: str) -> list[SearchSnippet]: ...


def _complete(
    provider: AgentProvider, agent: str, prompt: str, log: CallRecorder | None
):
    raw = provider.complete(agent, prompt)
    call = log.record(agent, prompt, raw) if log is not None else None
    return raw, call


# ---------------------------------------------------------------------------
# Router
# ---------------------------------------------------------------------------


def route(
    provider: AgentProvider, question: str, log: CallRecorder | None = None
) -> RoutingDistribution:
    """Estimate the hazard distribution for a question. Always succeeds.

    The provider must return a JSON object with exactly the seven hazard
    keys. Values are clamped to [0, 1]; a sum inside ROUTER_SUM_WINDOW is
    renormalized to 1, anything else triggers a retry and finally the
    uniform fallback.
    """
    prompt = render_prompt(get_template("router"), {"question": question})
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw, call = _complete(provider, "router", prompt, log)
        try:
            data = json.loads(raw)
        except json.JSONDecodeError:
            continue
        if not isinstance(data, dict) or set(data) != set(HAZARD_CATEGORIES):
            continue
        try:
            clamped = {h: min(1.0, max(0.0, float(data[h]))) for h in HAZARD_CATEGORIES}
        except (TypeError, ValueError):
            continue
        total = sum(clamped.values())
        if not math.isfinite(total) or not ROUTER_SUM_WINDOW[0] <= total <= ROUTER_SUM_WINDOW[1]:
            continue
        dist = RoutingDistribution({h: clamped[h] / total for h in HAZARD_CATEGORIES})
        if call is not None:
            call.parsed = json.dumps(dist.to_dict())
        return dist
    logger.warning("router output unusable after retries; falling back to uniform")
    return RoutingDistribution.uniform()


def make_router(provider: AgentProvider, log: CallRecorder | None = None):
    """Bind the router role to a provider as a plain callable."""

    def _route(question: str) -> RoutingDistribution:
        return route(provider, question, log)

    return _route


# ---------------------------------------------------------------------------
# Evidence evaluator
# ---------------------------------------------------------------------------


def evaluate_sufficiency(
    provider: AgentProvider,
    question: str,
    evidence: EvidenceContext,
    log: CallRecorder | None = None,
) -> SufficiencyVerdict:
    """Binary sufficiency check; parse failures resolve to insufficient."""
    prompt = render_prompt(
        get_template("evaluator"), {"question": question, "evidence": evidence.text}
    )
    raw = ""
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw, call = _complete(provider, "evaluator", prompt, log)
        token = raw.strip()
        if token in ("0", "1"):
            if call is not None:
                call.parsed = token
            return SufficiencyVerdict(sufficient=token == "1", raw=raw)
    return SufficiencyVerdict(sufficient=False, raw=raw)


# ---------------------------------------------------------------------------
# Online search
# ---------------------------------------------------------------------------


def online_search(
    backend: SearchBackend,
    question: str,
    n: int = MAX_SEARCH_SNIPPETS,
    log: CallRecorder | None = None,
) -> EvidenceContext:
    """Fetch up to n web snippets and wrap them as an evidence context.

    The agent is non-generative. An unreachable backend yields an empty
    context with a warning so the verification loop can continue.
    """
    if not 1 <= n <= MAX_SEARCH_SNIPPETS:
        raise ValueError(f"n must be in [1, {MAX_SEARCH_SNIPPETS}]")
    try:
        snippets = backend.search(question)[:n]
    except Exception as exc:
        logger.warning("search backend %s unreachable: %s", backend.identifier, exc)
        if log is not None:
            log.record("online_search", question, f"error: {exc}", parsed="0 snippets")
        return EvidenceContext.empty()
    blocks = []
    sources = []
    for i, snip in enumerate(snippets, start=1):
        blocks.append(f"[{i}] ({snip.source_url}) {snip.text}")
        sources.append(snip.source_url)
    if log is not None:
        log.record(
            "online_search",
            question,
            json.dumps([{"text": s.text, "url": s.source_url} for s in snippets]),
            parsed=f"{len(snippets)} snippets",
        )
    return EvidenceContext(text="\n".join(blocks), sources=tuple(sources))


class FixtureSearchBackend:
    """Serves canned snippets keyed by the exact query string."""

    def __init__(self, results: dict | None = None, identifier: str = "fixture-search"):
        self.identifier = identifier
        self._results = results or {}

    def search(self, query: str) -> list[SearchSnippet]:
        hits = self._results.get(query, [])
        return [
            SearchSnippet(text=str(h["text"]), source_url=str(h["url"]), rank=i)
            for i, h in enumerate(hits, start=1)
        ]

    def to_fixture(self) -> dict:
        return {"version": 1, "identifier": self.identifier, "results": self._results}


def load_search_fixture(path: str | Path) -> FixtureSearchBackend:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return FixtureSearchBackend(
        results=data.get("results", {}), identifier=str(data.get("identifier", "fixture-search"))
    )


def save_search_fixture(backend: FixtureSearchBackend, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(backend.to_fixture(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


class HTTPSearchBackend:
    """Queries an endpoint returning a JSON list of {text, url} objects."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.identifier = f"http-search:{endpoint}"
        self.timeout = timeout

    def search(self, query: str) -> list[SearchSnippet]:
        resp = requests.get(self.endpoint, params={"q": query}, timeout=self.timeout)
        resp.raise_for_status()
        return [
            SearchSnippet(text=str(h["text"]), source_url=str(h["url"]), rank=i)
            for i, h in enumerate(resp.json(), start=1)
        ]


# ---------------------------------------------------------------------------
# Reflection & question rewriter
# ---------------------------------------------------------------------------


def rewrite_question(
    provider: AgentProvider,
    question: str,
    evidence: EvidenceContext,
    log: CallRecorder | None = None,
) -> str:
    """Rewrite the question for better retrieval.

    The first non-empty output line is taken. If the provider keeps
    producing nothing new, the original question is returned unchanged;
    callers detect the no-progress case by equality.
    """
    prompt = render_prompt(
        get_template("rewriter"), {"question": question, "evidence": evidence.text}
    )
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw, call = _complete(provider, "rewriter", prompt, log)
        lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
        candidate = lines[0] if lines else ""
        if candidate and candidate != question:
            if call is not None:
                call.parsed = candidate
            return candidate
    return question


# ---------------------------------------------------------------------------
# Answer writer
# ---------------------------------------------------------------------------


def _parse_answer_token(raw: str, kind: str) -> str | None:
    token = raw.strip().strip(_PUNCT_STRIP).casefold()
    if kind == KIND_TRUE_FALSE and token in ("true", "false"):
        return token
    if kind == KIND_MULTIPLE_CHOICE and token in ("a", "b", "c", "d"):
        return token.upper()
    return None


def write_answer(
    provider: AgentProvider,
    question: str,
    kind: str,
    evidence: EvidenceContext | None = None,
    log: CallRecorder | None = None,
) -> FinalAnswer:
    """Produce the final answer token, or an abstention after retries.

    Output is normalized (trim, strip trailing punctuation, case-fold)
    before the domain check: true/false for statements, A-D for multiple
    choice. grounded records whether evidence was supplied.
    """
    if kind not in ANSWER_KINDS:
        raise ValueError(f"unknown answer kind: {kind!r}")
    prompt = render_prompt(
        get_template("answer_writer"),
        {"question": question, "evidence": evidence.text if evidence is not None else ""},
    )
    grounded = evidence is not None
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw, call = _complete(provider, "answer_writer", prompt, log)
        value = _parse_answer_token(raw, kind)
        if value is not None:
            if call is not None:
                call.parsed = value
            return FinalAnswer(kind=kind, value=value, grounded=grounded)
    logger.warning("answer writer produced no in-domain token; recording abstention")
    return FinalAnswer(kind=kind, value=None, grounded=grounded)
