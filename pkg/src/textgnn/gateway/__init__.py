from .base import (
    AuthError,
    BackendConfig,
    BackendUnavailableError,
    CompletionParams,
    EmbeddingVector,
    EmptyResponseError,
    Gateway,
    GatewayError,
    Message,
    NetworkError,
    RateLimitedError,
    hash_hex,
    stable_hash,
)
from .mock import MockBackend


def make_gateway(config: BackendConfig | None = None) -> Gateway:
    config = config or BackendConfig()
    if config.kind == "mock":
        return Gateway(MockBackend(), config)
    from .http import HttpBackend

    return Gateway(HttpBackend(config), config)


def mock_gateway(**overrides) -> Gateway:
    return Gateway(MockBackend(), BackendConfig(kind="mock", **overrides))


__all__ = [
    "AuthError",
    "BackendConfig",
    "BackendUnavailableError",
    "CompletionParams",
    "EmbeddingVector",
    "EmptyResponseError",
    "Gateway",
    "GatewayError",
    "Message",
    "MockBackend",
    "NetworkError",
    "RateLimitedError",
    "hash_hex",
    "make_gateway",
    "mock_gateway",
    "stable_hash",
]
