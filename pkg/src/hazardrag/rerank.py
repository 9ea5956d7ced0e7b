"""Pluggable relevance scorers for the fine-grained reranking stage."""

from __future__ import annotations

import logging
import re
from typing import Protocol

logger = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[\w']+")

_SCORE_RETRIES = 2

# Pointwise relevance prompt for the provider-backed scorer. Deliberately
# minimal: the scoring model is pluggable, not trained here.
_RELEVANCE_PROMPT = """Rate how relevant the passage is to the question on a scale from 0 to 1.
Question: {question}
Passage: {passage}

Rules:
1) Output only a single decimal number between 0 and 1.
2) Do not include explanations or additional text.
"""


class RerankScorer(Protocol):
    identifier: str

    def score(self, query: str, text: str) -> float: ...


class LexicalOverlapScorer:
    """Deterministic token-overlap scorer for offline runs and tests.

    Score is |query tokens ∩ passage tokens| / |query tokens| over
    casefolded word tokens, so a passage containing the whole query
    scores 1.0.
    """

    identifier = "lexical-overlap"

    def score(self, query: str, text: str) -> float:
        query_tokens = set(_WORD_RE.findall(query.casefold()))
        if not query_tokens:
            return 0.0
        text_tokens = set(_WORD_RE.findall(text.casefold()))
        return len(query_tokens & text_tokens) / len(query_tokens)


class ProviderRerankScorer:
    """Scores (query, passage) pairs by prompting an agent provider."""

    def __init__(self, provider):
        self.provider = provider
        self.identifier = f"provider:{provider.identifier}"

    def score(self, query: str, text: str) -> float:
        prompt = _RELEVANCE_PROMPT.format(question=query, passage=text)
        for attempt in range(1 + _SCORE_RETRIES):
            raw = self.provider.complete("rerank_scorer", prompt)
            try:
                value = float(raw.strip())
            except ValueError:
                continue
            return min(1.0, max(0.0, value))
        logger.warning("rerank scorer returned no parseable number; scoring 0.0")
        return 0.0
