from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

logger = logging.getLogger(__name__)

Message = tuple[str, str]  # (role, text)


class GatewayError(RuntimeError):
    """Base class for backend failures."""


class NetworkError(GatewayError):
    pass


class RateLimitedError(GatewayError):
    pass


class AuthError(GatewayError):
    pass


class EmptyResponseError(GatewayError):
    pass


class BackendUnavailableError(GatewayError):
    """The backend cannot be constructed at all (missing credential, bad endpoint)."""


RETRYABLE = (NetworkError, RateLimitedError)


@dataclass(frozen=True)
class CompletionParams:
    model: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model: str

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"  # "mock" | "http-api"
    endpoint: str = "https://api.openai.com/v1"
    credential_env_var: str = "OPENAI_API_KEY"
    request_timeout: float = 60.0
    max_retries: int = 3
    concurrency_limit: int = 8
    backoff_base: float = 0.5
    model: str = "gpt-4o-mini"
    embedding_model: str = "text-embedding-3-large"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    # Character budget for rendered prompts; None disables truncation.
    prompt_char_budget: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "http-api"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.prompt_char_budget is not None and self.prompt_char_budget < 1:
            raise ValueError("prompt_char_budget must be positive")

    def completion_params(self) -> CompletionParams:
        return CompletionParams(self.model, self.temperature, self.max_output_tokens)


def stable_hash(payload: object) -> int:
    """64-bit hash of a JSON-serialisable payload, identical across runs and platforms."""
    blob = json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "big")


def hash_hex(payload: object) -> str:
    return f"{stable_hash(payload):016x}"


class Backend(Protocol):
    def complete(self, messages: Sequence[Message], params: CompletionParams) -> str: ...

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]: ...


@dataclass
class Gateway:
    """Front door for all model traffic: validation, retries and a concurrency cap.

    Safe to share across threads. ``completions`` and ``embeddings`` count
    successful backend calls.
    """

    backend: Backend
    config: BackendConfig = field(default_factory=BackendConfig)
    sleep: object = time.sleep

    def __post_init__(self) -> None:
        self._slots = threading.BoundedSemaphore(self.config.concurrency_limit)
        self._lock = threading.Lock()
        self.completions = 0
        self.embeddings = 0

    @property
    def prompt_char_budget(self) -> int | None:
        return self.config.prompt_char_budget

    def _call(self, fn, *args):
        attempt = 0
        while True:
            try:
                with self._slots:
                    return fn(*args)
            except RETRYABLE as exc:
                if attempt >= self.config.max_retries:
                    raise
                delay = self.config.backoff_base * (2**attempt)
                logger.warning("retrying after %s (attempt %d, sleep %.2fs)", exc, attempt + 1, delay)
                self.sleep(delay)
                attempt += 1

    def complete(self, messages: Sequence[Message], params: CompletionParams | None = None) -> str:
        if not messages:
            raise ValueError("complete() needs at least one message")
        params = params or self.config.completion_params()
        msgs = [(str(r), str(t)) for r, t in messages]
        out = self._call(self.backend.complete, msgs, params)
        if not out or not out.strip():
            raise EmptyResponseError("backend returned an empty completion")
        with self._lock:
            self.completions += 1
        return out

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        texts = list(texts)
        for i, t in enumerate(texts):
            if not t or not t.strip():
                raise ValueError(f"embed(): text {i} is empty")
        if not texts:
            return []
        model = self.config.embedding_model
        raw = self._call(self.backend.embed, texts, model)
        if len(raw) != len(texts):
            raise EmptyResponseError(f"expected {len(texts)} embeddings, got {len(raw)}")
        with self._lock:
            self.embeddings += 1
        return [EmbeddingVector(tuple(float(x) for x in v), model) for v in raw]
