"""Chat-completion providers: an HTTP client with retries and rate limiting, and a scripted double."""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Protocol, Union
from urllib.parse import urlparse

import httpx

from .prompts import PromptBundle


class ProviderError(RuntimeError):
    """A completion request failed.

    ``attempts`` is the number of requests actually sent; ``retryable`` tells
    whether the last failure belonged to the retryable class.
    """

    def __init__(self, message: str, attempts: int = 1, retryable: bool = False):
        super().__init__(message)
        self.attempts = attempts
        self.retryable = retryable


class ProviderConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    endpoint: str
    model_id: str
    api_key_env: Optional[str] = None
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 60.0
    max_retries: int = 5
    requests_per_minute: int = 60
    backoff_base: float = 1.0
    backoff_max: float = 60.0

    def __post_init__(self):
        parsed = urlparse(self.endpoint)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ProviderConfigError(f"{self.name}: endpoint must be an absolute http(s) URL")
        if self.timeout <= 0:
            raise ProviderConfigError(f"{self.name}: timeout must be positive")
        if self.requests_per_minute <= 0:
            raise ProviderConfigError(f"{self.name}: requests_per_minute must be positive")
        if self.temperature < 0:
            raise ProviderConfigError(f"{self.name}: temperature must be >= 0")
        if self.max_retries < 0 or self.max_output_tokens <= 0:
            raise ProviderConfigError(f"{self.name}: invalid max_retries or max_output_tokens")

    @classmethod
    def from_dict(cls, name: str, data: Mapping[str, Any]) -> "ProviderConfig":
        known = set(cls.__dataclass_fields__) - {"name"}
        extra = set(data) - known - {"kind"}
        if extra:
            raise ProviderConfigError(f"{name}: unknown provider fields {sorted(extra)}")
        try:
            return cls(name=name, **{k: v for k, v in data.items() if k in known})
        except TypeError as exc:
            raise ProviderConfigError(f"{name}: {exc}") from None


@dataclass
class CompletionResult:
    text: str
    latency: float
    attempts: int
    provider_meta: dict[str, Any] = field(default_factory=dict)


class Provider(Protocol):
    name: str

    def complete(self, bundle: PromptBundle) -> CompletionResult: ...


def fingerprint(bundle: PromptBundle) -> str:
    """Stable, order-sensitive SHA-256 over message roles and contents."""
    payload = json.dumps(
        [[m.role, m.content] for m in bundle.messages], ensure_ascii=False, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class RateLimiter:
    """Sliding-window limiter: at most ``per_minute`` starts in any [t, t+60) window."""

    def __init__(
        self,
        per_minute: int,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        window: float = 60.0,
    ):
        if per_minute <= 0:
            raise ValueError("per_minute must be positive")
        self.per_minute = per_minute
        self.window = window
        self._clock = clock
        self._sleep = sleep
        self._expiries: deque[float] = deque()  # start + window per admitted request
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a request may start; return the admitted start time."""
        while True:
            with self._lock:
                now = self._clock()
                while self._expiries and self._expiries[0] <= now:
                    self._expiries.popleft()
                if len(self._expiries) < self.per_minute:
                    self._expiries.append(now + self.window)
                    return now
                wait = self._expiries[0] - now
            self._sleep(wait)


_RETRYABLE_STATUS = {429} | set(range(500, 600))


class HTTPProvider:
    """Client for ``POST {endpoint}/chat/completions``.

    Retries timeouts, transport errors, 429 and 5xx with exponential backoff;
    other 4xx responses and malformed bodies fail on the spot.  ``clock``,
    ``sleep`` and ``rng`` are injectable so retry and rate-limit behaviour can
    be exercised without real waiting.
    """

    def __init__(
        self,
        config: ProviderConfig,
        client: Optional[httpx.Client] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ):
        self.config = config
        self.name = config.name
        self._client = client or httpx.Client(timeout=config.timeout)
        self._clock = clock
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._rng_lock = threading.Lock()
        self.limiter = RateLimiter(config.requests_per_minute, clock=clock, sleep=sleep)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        env = self.config.api_key_env
        if env:
            key = os.environ.get(env)
            if not key:
                raise ProviderError(f"{self.name}: environment variable {env} is not set", attempts=0)
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _request_body(self, bundle: PromptBundle) -> dict[str, Any]:
        return {
            "model": self.config.model_id,
            "messages": bundle.to_wire(),
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }

    def _next_delay(self, retry_index: int) -> float:
        with self._rng_lock:
            jitter = self._rng.random()
        return min(self.config.backoff_max, self.config.backoff_base * 2**retry_index * (1 + jitter))

    def complete(self, bundle: PromptBundle) -> CompletionResult:
        headers = self._headers()
        body = self._request_body(bundle)
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        started = self._clock()
        max_attempts = self.config.max_retries + 1
        last_error = ""
        for attempt in range(1, max_attempts + 1):
            self.limiter.acquire()
            try:
                response = self._client.post(url, json=body, headers=headers, timeout=self.config.timeout)
            except httpx.TimeoutException as exc:
                last_error = f"timeout: {exc}"
            except httpx.TransportError as exc:
                last_error = f"transport error: {exc}"
            else:
                status = response.status_code
                if status < 400:
                    text, meta = self._parse(response, attempt)
                    return CompletionResult(
                        text=text, latency=self._clock() - started, attempts=attempt, provider_meta=meta
                    )
                if status not in _RETRYABLE_STATUS:
                    raise ProviderError(
                        f"{self.name}: HTTP {status} (not retryable): {response.text[:200]}",
                        attempts=attempt,
                    )
                last_error = f"HTTP {status}"
            if attempt < max_attempts:
                self._sleep(self._next_delay(attempt - 1))
        raise ProviderError(
            f"{self.name}: giving up after {max_attempts} attempts ({last_error})",
            attempts=max_attempts,
            retryable=True,
        )

    def _parse(self, response: httpx.Response, attempt: int) -> tuple[str, dict[str, Any]]:
        try:
            payload = response.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise ProviderError(f"{self.name}: malformed response body", attempts=attempt) from None
        if content is None:
            content = ""
        if not isinstance(content, str):
            raise ProviderError(f"{self.name}: malformed response body", attempts=attempt)
        meta: dict[str, Any] = {"model": payload.get("model", self.config.model_id)}
        if isinstance(payload.get("usage"), dict):
            meta["usage"] = payload["usage"]
        return content, meta

    def close(self) -> None:
        self._client.close()


Reply = Union[str, Callable[[PromptBundle], str]]


class ScriptedProvider:
    """Deterministic test double keyed by request fingerprint.

    ``script`` maps fingerprints to replies; unmatched requests fall back to
    ``default``.  A reply may be a string or a callable taking the bundle,
    which may raise ProviderError to simulate a failing endpoint.
    """

    def __init__(
        self,
        script: Optional[Mapping[str, Reply]] = None,
        default: Optional[Reply] = None,
        name: str = "scripted",
    ):
        self.script = dict(script or {})
        self.default = default
        self.name = name
        self.calls: list[PromptBundle] = []
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle) -> CompletionResult:
        with self._lock:
            self.calls.append(bundle)
        reply = self.script.get(fingerprint(bundle), self.default)
        if reply is None:
            raise ProviderError(f"{self.name}: no scripted reply for request {fingerprint(bundle)[:12]}")
        text = reply(bundle) if callable(reply) else reply
        return CompletionResult(text=text, latency=0.0, attempts=1, provider_meta={"model": self.name})
