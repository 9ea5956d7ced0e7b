"""LLM provider abstraction: scripted deterministic mock and HTTP adapter."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

logger = logging.getLogger(__name__)

# Regeneration retries after a malformed structured output, per agent call.
MAX_PARSE_RETRIES = 2

_TRANSPORT_RETRIES = 2


class ProviderError(RuntimeError):
    """Raised when a provider cannot produce output."""


class StructuredOutputError(ProviderError):
    """Raised when provider output stays malformed after all retries."""


class AgentProvider(Protocol):
    identifier: str

    def complete(self, agent: str, prompt: str) -> str: ...


@dataclass
class AgentCall:
    """One provider (or search) invocation, as recorded in a trace."""

    agent: str
    prompt_sha256: str
    raw: str
    parsed: str | None = None


class CallRecorder:
    """Collects AgentCall records for a single inference run."""

    def __init__(self):
        self.calls: list[AgentCall] = []

    def record(self, agent: str, prompt: str, raw: str, parsed: str | None = None) -> AgentCall:
        call = AgentCall(
            agent=agent,
            prompt_sha256=hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
            raw=raw,
            parsed=parsed,
        )
        self.calls.append(call)
        return call


# ---------------------------------------------------------------------------
# Scripted mock provider
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MockRule:
    """Content-keyed response: fires when every substring is in the prompt."""

    contains: tuple[str, ...]
    response: str

    def matches(self, prompt: str) -> bool:
        return all(s in prompt for s in self.contains)


@dataclass
class ScriptedMockProvider:
    """Deterministic provider driven by per-agent scripts.

    Two layers answer a call, in order:
      1. `sequences[agent]`: canned outputs consumed one per call;
      2. `rules[agent]`: first rule whose substrings all occur in the prompt
         (safe under concurrent batches, since selection depends only on
         prompt content);
    falling back to `defaults[agent]`, else raising ProviderError.
    Every call is logged for counting-mock assertions.
    """

    identifier: str = "mock"
    sequences: dict = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)

    def __post_init__(self):
        self._lock = threading.Lock()
        self._cursors: dict[str, int] = {}
        self.calls: list[tuple[str, str]] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def counts_by_agent(self) -> dict:
        counts: dict[str, int] = {}
        for agent, _ in self.calls:
            counts[agent] = counts.get(agent, 0) + 1
        return counts

    def reset(self) -> None:
        with self._lock:
            self._cursors.clear()
            self.calls.clear()

    def complete(self, agent: str, prompt: str) -> str:
        with self._lock:
            self.calls.append((agent, prompt))
            seq = self.sequences.get(agent, [])
            cursor = self._cursors.get(agent, 0)
            if cursor < len(seq):
                self._cursors[agent] = cursor + 1
                return seq[cursor]
        for rule in self.rules.get(agent, []):
            if rule.matches(prompt):
                return rule.response
        if agent in self.defaults:
            return self.defaults[agent]
        raise ProviderError(f"mock script exhausted for agent {agent!r}")

    def to_script(self) -> dict:
        return {
            "version": 1,
            "identifier": self.identifier,
            "sequences": {a: list(s) for a, s in self.sequences.items()},
            "rules": {
                a: [{"contains": list(r.contains), "response": r.response} for r in rules]
                for a, rules in self.rules.items()
            },
            "defaults": dict(self.defaults),
        }


def mock_provider_from_script(data: dict) -> ScriptedMockProvider:
    rules = {
        agent: [
            MockRule(contains=tuple(r.get("contains", [])), response=str(r["response"]))
            for r in rule_list
        ]
        for agent, rule_list in data.get("rules", {}).items()
    }
    return ScriptedMockProvider(
        identifier=str(data.get("identifier", "mock")),
        sequences={a: [str(x) for x in s] for a, s in data.get("sequences", {}).items()},
        rules=rules,
        defaults={a: str(v) for a, v in data.get("defaults", {}).items()},
    )


def load_mock_script(path: str | Path) -> ScriptedMockProvider:
    """Load a mock provider script from a JSON file."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ProviderError(f"mock script {path} must be a JSON object")
    return mock_provider_from_script(data)


def save_mock_script(provider: ScriptedMockProvider, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(provider.to_script(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# HTTP chat provider
# ---------------------------------------------------------------------------


class HTTPChatProvider:
    """Chat-completions adapter; temperature pinned to 0 for every agent.

    Request: {"model", "messages": [{"role", "content"}], "temperature"}
    Response: {"choices": [{"message": {"content": ...}}]}
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.identifier = f"http:{model}"
        self._api_key = api_key
        self.timeout = timeout

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def complete(self, agent: str, prompt: str) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "system", "content": prompt}],
            "temperature": 0.0,
        }
        last_exc: Exception | None = None
        for attempt in range(1 + _TRANSPORT_RETRIES):
            try:
                resp = requests.post(
                    self.endpoint, json=body, headers=self._headers(), timeout=self.timeout
                )
                resp.raise_for_status()
                return str(resp.json()["choices"][0]["message"]["content"])
            except Exception as exc:
                last_exc = exc
                logger.warning(
                    "chat request for agent %s failed (attempt %d): %s", agent, attempt + 1, exc
                )
                time.sleep(0.2 * (attempt + 1))
        raise ProviderError(f"chat backend unreachable: {last_exc}") from last_exc
