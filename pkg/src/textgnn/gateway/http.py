"""OpenAI-compatible chat/embedding client over httpx."""

from __future__ import annotations

import os
from typing import Sequence

import httpx

from .base import (
    AuthError,
    BackendConfig,
    BackendUnavailableError,
    CompletionParams,
    EmptyResponseError,
    GatewayError,
    Message,
    NetworkError,
    RateLimitedError,
)


class HttpBackend:
    def __init__(self, config: BackendConfig, client: httpx.Client | None = None):
        key = os.environ.get(config.credential_env_var)
        if not key:
            raise BackendUnavailableError(f"environment variable {config.credential_env_var} is not set")
        self.config = config
        self._client = client or httpx.Client(timeout=config.request_timeout)
        self._headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def _post(self, path: str, body: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        try:
            r = self._client.post(url, json=body, headers=self._headers)
        except (httpx.TransportError, httpx.TimeoutException) as exc:
            raise NetworkError(str(exc)) from exc
        if r.status_code in (401, 403):
            raise AuthError(f"HTTP {r.status_code} from {url}")
        if r.status_code == 429:
            raise RateLimitedError(f"HTTP 429 from {url}")
        if r.status_code >= 500:
            raise NetworkError(f"HTTP {r.status_code} from {url}")
        if r.status_code >= 400:
            raise GatewayError(f"HTTP {r.status_code} from {url}: {r.text[:200]}")
        try:
            return r.json()
        except ValueError as exc:
            raise EmptyResponseError(f"non-JSON body from {url}") from exc

    def complete(self, messages: Sequence[Message], params: CompletionParams) -> str:
        body = {
            "model": params.model,
            "messages": [{"role": role, "content": text} for role, text in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        }
        data = self._post("/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise EmptyResponseError("completion response has no choices") from exc

    def embed(self, texts: Sequence[str], model: str) -> list[list[float]]:
        data = self._post("/embeddings", {"model": model, "input": list(texts)})
        try:
            items = sorted(data["data"], key=lambda d: d.get("index", 0))
            return [item["embedding"] for item in items]
        except (KeyError, TypeError) as exc:
            raise EmptyResponseError("embedding response has no data") from exc
