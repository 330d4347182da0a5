"""Chat-completion client with a deterministic replay backend for tests.

The HTTP backend talks to any OpenAI-compatible endpoint.  The API key
comes from the LEADER_API_KEY environment variable and is never written
to disk or embedded in serialized requests.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field

DEFAULT_MODEL = "gpt-4o"
DEFAULT_TEMPERATURE = 0.5
ENV_API_KEY = "LEADER_API_KEY"


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[tuple[str, str], ...]  # (role, content)
    temperature: float = DEFAULT_TEMPERATURE
    model: str = DEFAULT_MODEL

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


class BackendError(Exception):
    pass


class ReplayMiss(BackendError):
    def __init__(self, request: ChatRequest):
        super().__init__(f"no canned reply for request digest {request.digest()}")
        self.request = request


class ChatBackend:
    def complete(self, request: ChatRequest) -> str:
        raise NotImplementedError


@dataclass
class ReplayBackend(ChatBackend):
    """Maps request digests to canned replies; misses raise."""

    replies: dict[str, str] = field(default_factory=dict)
    log: list[ChatRequest] = field(default_factory=list)

    def add(self, request: ChatRequest, reply: str):
        self.replies[request.digest()] = reply

    def complete(self, request: ChatRequest) -> str:
        self.log.append(request)
        try:
            return self.replies[request.digest()]
        except KeyError:
            raise ReplayMiss(request) from None


class HttpBackend(ChatBackend):
    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        max_retries: int = 3,
        backoff: float = 1.0,
        max_concurrency: int = 4,
        timeout: float = 120.0,
    ):
        key = api_key if api_key is not None else os.environ.get(ENV_API_KEY)
        if not key:
            raise BackendError(
                f"no API key: set {ENV_API_KEY} or pass api_key explicitly"
            )
        self.base_url = base_url.rstrip("/")
        self._key = key
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self._gate = threading.Semaphore(max_concurrency)

    def complete(self, request: ChatRequest) -> str:
        import requests

        url = f"{self.base_url}/chat/completions"
        headers = {"Authorization": f"Bearer {self._key}"}
        last: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = requests.post(
                        url,
                        headers=headers,
                        json=request.to_json(),
                        timeout=self.timeout,
                    )
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise BackendError(f"malformed completion response: {exc}") from exc
        raise BackendError(f"request failed after retries: {last}")
