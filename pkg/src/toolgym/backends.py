"""Pluggable LLM backends: a strict scripted double for tests and offline
runs, and a chat-completions client for real ones.

Nothing else in the package opens a network connection; generation,
validation, and reward all go through a Backend handle.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Protocol

import requests

from .errors import (
    BackendTimeout,
    BackendUnavailable,
    MissingScript,
    UnparseableVerdict,
)


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "scripted"  # "scripted" | "remote"
    endpoint: str | None = None
    model_name: str | None = None
    api_key_env: str | None = None
    timeout: float = 30.0
    max_retries: int = 3
    temperature: float = 0.0
    max_in_flight: int = 8
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.kind not in ("scripted", "remote"):
            raise ValueError(f"unknown backend kind: {self.kind}")
        if self.kind == "remote" and (not self.endpoint or not self.model_name):
            raise ValueError("remote backend requires endpoint and model_name")


class Backend(Protocol):
    def complete(self, prompt: str) -> str: ...


def prompt_key(prompt: str) -> str:
    """Stable key for keyed scripted backends."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class ScriptedBackend:
    """Deterministic test double.

    Queue mode pops responses in order; keyed mode looks responses up by
    prompt hash (see prompt_key). Asking for anything unscripted raises
    MissingScript so a test can never pass by silent default. Queue entries
    that are Exception instances are raised instead of returned, which lets
    tests script backend failures.
    """

    def __init__(self, responses=(), keyed: dict[str, str] | None = None):
        self._queue = deque(responses)
        self._keyed = dict(keyed) if keyed else None
        self._lock = threading.Lock()
        self.calls: list[str] = []

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls.append(prompt)
            if self._keyed is not None:
                key = prompt_key(prompt)
                if key not in self._keyed:
                    raise MissingScript(f"no scripted response for prompt key {key}")
                return self._keyed[key]
            if not self._queue:
                raise MissingScript("scripted response queue is empty")
            item = self._queue.popleft()
        if isinstance(item, Exception):
            raise item
        return item

    def remaining(self) -> int:
        with self._lock:
            return len(self._queue)


class RemoteBackend:
    """Chat-completions client with retry/backoff and an in-flight cap.

    Credentials come only from the named environment variable and are never
    logged or echoed in errors.
    """

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        if config.kind != "remote":
            raise ValueError("RemoteBackend requires a remote BackendConfig")
        self.config = config
        self._session = session or requests.Session()
        self._gate = threading.Semaphore(config.max_in_flight)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            if attempt:
                time.sleep(self.config.backoff_base * (2 ** (attempt - 1)))
            with self._gate:
                try:
                    resp = self._session.post(
                        self.config.endpoint,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.config.timeout,
                    )
                    resp.raise_for_status()
                    body = resp.json()
                    return body["choices"][0]["message"]["content"]
                except requests.Timeout as exc:
                    last_error = BackendTimeout(f"request timed out after {self.config.timeout}s")
                    last_error.__cause__ = exc
                except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                    last_error = exc
        raise BackendUnavailable(
            f"backend failed after {self.config.max_retries} attempts: {last_error}"
        )


def make_backend(config: BackendConfig, scripted_responses=()) -> Backend:
    if config.kind == "remote":
        return RemoteBackend(config)
    return ScriptedBackend(responses=scripted_responses)


_ACCEPT = re.compile(r"\bACCEPT\b", re.IGNORECASE)
_REJECT = re.compile(r"\bREJECT\b", re.IGNORECASE)


def parse_binary_verdict(reply: str) -> bool:
    """Read ACCEPT/REJECT from the last non-empty line of a judge reply."""
    for line in reversed(reply.splitlines()):
        line = line.strip()
        if not line:
            continue
        accept = bool(_ACCEPT.search(line))
        reject = bool(_REJECT.search(line))
        if accept == reject:
            break
        return accept
    raise UnparseableVerdict(f"no ACCEPT/REJECT verdict in reply: {reply[-80:]!r}")
