"""CLI configuration: key-value files, environment, backend factories.

Precedence is flags > environment > config file > defaults. Credentials are
environment-only and never end up in traces, reports, or identifiers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .agents import FixtureSearchBackend, HTTPSearchBackend, SearchBackend, load_search_fixture
from .embeddings import (
    DEFAULT_EMBED_DIM,
    EmbeddingProvider,
    HTTPEmbeddingProvider,
    MockEmbeddingProvider,
)
from .providers import AgentProvider, HTTPChatProvider, load_mock_script
from .rerank import LexicalOverlapScorer, ProviderRerankScorer, RerankScorer

ENV_PREFIX = "HAZARDRAG_"

DEFAULTS = {
    "tau": 0.2,
    "coarse_budget": 50,
    "rerank_k": 5,
    "max_iterations": 5,
    "search_n": 5,
    "parallelism": 1,
    "seed": 0,
    "embed_dim": DEFAULT_EMBED_DIM,
    "provider": "mock",
    "embedder": "mock",
    "search": "none",
    "scorer": "lexical",
    "index": "index.hridx",
}

_INT_KEYS = ("coarse_budget", "rerank_k", "max_iterations", "search_n", "parallelism", "seed", "embed_dim")
_FLOAT_KEYS = ("tau",)


class ConfigError(ValueError):
    """Raised for unusable configuration values."""


def load_config_file(path: str | Path) -> dict:
    """Parse a plain "key = value" file; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


@dataclass
class Settings:
    tau: float
    coarse_budget: int
    rerank_k: int
    max_iterations: int
    search_n: int
    parallelism: int
    seed: int
    embed_dim: int
    provider: str
    embedder: str
    search: str
    scorer: str
    index: str


def resolve_settings(flag_values: dict, config_path: str | None = None) -> Settings:
    """Merge flags over environment over config file over defaults."""
    merged = dict(DEFAULTS)
    if config_path:
        merged.update(load_config_file(config_path))
    for key in DEFAULTS:
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            merged[key] = env_value
    for key, value in flag_values.items():
        if key in DEFAULTS and value is not None:
            merged[key] = value
    try:
        for key in _INT_KEYS:
            merged[key] = int(merged[key])
        for key in _FLOAT_KEYS:
            merged[key] = float(merged[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric configuration value: {exc}") from exc
    return Settings(**{k: merged[k] for k in DEFAULTS})


# ---------------------------------------------------------------------------
# Backend factories
# ---------------------------------------------------------------------------


def build_agent_provider(spec: str) -> AgentProvider:
    """"mock:<script.json>" for scripted runs, "http" for a live endpoint."""
    if spec.startswith("mock:"):
        return load_mock_script(spec.split(":", 1)[1])
    if spec == "mock":
        raise ConfigError("mock provider requires a script path: mock:<script.json>")
    if spec == "http":
        endpoint = os.environ.get(ENV_PREFIX + "LLM_ENDPOINT")
        model = os.environ.get(ENV_PREFIX + "LLM_MODEL")
        if not endpoint or not model:
            raise ConfigError(
                "http provider requires HAZARDRAG_LLM_ENDPOINT and HAZARDRAG_LLM_MODEL"
            )
        return HTTPChatProvider(
            endpoint=endpoint, model=model, api_key=os.environ.get(ENV_PREFIX + "LLM_API_KEY")
        )
    raise ConfigError(f"unknown provider spec: {spec!r}")


def build_embedder(spec: str, dim: int, seed: int) -> EmbeddingProvider:
    """"mock" for the seeded hash embedder, "http" for a live endpoint."""
    if spec == "mock":
        return MockEmbeddingProvider(dim=dim, seed=seed)
    if spec == "http":
        endpoint = os.environ.get(ENV_PREFIX + "EMBED_ENDPOINT")
        model = os.environ.get(ENV_PREFIX + "EMBED_MODEL")
        if not endpoint or not model:
            raise ConfigError(
                "http embedder requires HAZARDRAG_EMBED_ENDPOINT and HAZARDRAG_EMBED_MODEL"
            )
        return HTTPEmbeddingProvider(
            endpoint=endpoint,
            model=model,
            dim=dim,
            api_key=os.environ.get(ENV_PREFIX + "EMBED_API_KEY"),
        )
    raise ConfigError(f"unknown embedder spec: {spec!r}")


def build_search_backend(spec: str) -> SearchBackend | None:
    """"none", "fixture:<file.json>", or "http:<url>"."""
    if spec == "none":
        return None
    if spec.startswith("fixture:"):
        return load_search_fixture(spec.split(":", 1)[1])
    if spec.startswith("http:") or spec.startswith("https:"):
        return HTTPSearchBackend(endpoint=spec)
    if spec == "fixture":
        return FixtureSearchBackend()
    raise ConfigError(f"unknown search backend spec: {spec!r}")


def build_scorer(spec: str, provider: AgentProvider | None = None) -> RerankScorer:
    """"lexical" offline scorer or "provider" pointwise scoring."""
    if spec == "lexical":
        return LexicalOverlapScorer()
    if spec == "provider":
        if provider is None:
            raise ConfigError("provider scorer requires an agent provider")
        return ProviderRerankScorer(provider)
    raise ConfigError(f"unknown scorer spec: {spec!r}")
