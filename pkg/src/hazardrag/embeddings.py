"""Embedding providers: a deterministic offline mock and an HTTP adapter."""

from __future__ import annotations

import hashlib
import logging
import re
import time
from typing import Protocol

import numpy as np
import requests

logger = logging.getLogger(__name__)

DEFAULT_EMBED_DIM = 1536

_WORD_RE = re.compile(r"[\w']+")

_TRANSPORT_RETRIES = 2


class DimensionMismatchError(ValueError):
    """Raised when an embedding's length disagrees with the expected dim."""


class EmbeddingProviderError(RuntimeError):
    """Raised when an embedding backend fails after retries."""


class EmbeddingProvider(Protocol):
    identifier: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]: ...


def embed(provider: EmbeddingProvider, text: str) -> np.ndarray:
    """Embed `text`, enforcing the provider contract (dim, finiteness)."""
    if not text or not text.strip():
        raise ValueError("text must be non-empty")
    vec = np.asarray(provider.embed(text), dtype=np.float32)
    if vec.ndim != 1 or vec.shape[0] != provider.dim:
        raise DimensionMismatchError(
            f"provider {provider.identifier} returned shape {vec.shape}, expected ({provider.dim},)"
        )
    if not np.isfinite(vec).all():
        raise EmbeddingProviderError(f"provider {provider.identifier} returned non-finite values")
    return vec


class MockEmbeddingProvider:
    """Seeded hash-projection embedder for offline tests.

    Each token maps to a fixed random unit vector derived from a SHA-256
    seed, and a text embeds as the normalized sum of its token vectors, so
    token overlap translates into cosine similarity deterministically.
    """

    def __init__(self, dim: int = DEFAULT_EMBED_DIM, seed: int = 0):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self.identifier = f"mock-hash-{dim}-s{seed}"
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        self._token_cache[token] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        tokens = _WORD_RE.findall(text.lower())
        if not tokens:
            raise ValueError("text must contain at least one token")
        total = np.zeros(self.dim)
        for token in tokens:
            total += self._token_vector(token)
        norm = np.linalg.norm(total)
        if norm == 0.0:
            raise EmbeddingProviderError("degenerate zero-sum embedding")
        return (total / norm).astype(np.float32)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class HTTPEmbeddingProvider:
    """Adapter for the common embeddings wire shape.

    Request: {"model": ..., "input": [text, ...]}
    Response: {"data": [{"embedding": [float, ...]}, ...]}
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        dim: int = DEFAULT_EMBED_DIM,
        api_key: str | None = None,
        timeout: float = 60.0,
        batch_size: int = 64,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.identifier = f"http:{model}"
        self._api_key = api_key
        self.timeout = timeout
        self.batch_size = batch_size

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def _request(self, texts: list[str]) -> list[np.ndarray]:
        last_exc: Exception | None = None
        for attempt in range(1 + _TRANSPORT_RETRIES):
            try:
                resp = requests.post(
                    self.endpoint,
                    json={"model": self.model, "input": texts},
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                data = resp.json()["data"]
                if len(data) != len(texts):
                    raise EmbeddingProviderError(
                        f"expected {len(texts)} embeddings, got {len(data)}"
                    )
                return [np.asarray(item["embedding"], dtype=np.float32) for item in data]
            except EmbeddingProviderError:
                raise
            except Exception as exc:  # transport or shape failure: retry
                last_exc = exc
                logger.warning("embedding request failed (attempt %d): %s", attempt + 1, exc)
                time.sleep(0.2 * (attempt + 1))
        raise EmbeddingProviderError(f"embedding backend unreachable: {last_exc}") from last_exc

    def embed(self, text: str) -> np.ndarray:
        return self._request([text])[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            out.extend(self._request(texts[start : start + self.batch_size]))
        return out
