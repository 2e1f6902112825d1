"""Bridge configuration."""

from __future__ import annotations

from dataclasses import dataclass

TRANSPORTS = ("stdio", "tcp")


class ConfigError(ValueError):
    """Raised when a bridge configuration is unusable."""


@dataclass(frozen=True)
class BridgeConfig:
    """Everything needed to start a bridge server.

    model:
        Identifier of the masked-language model: a local directory produced
        by ``save_pretrained`` or a model-hub name.
    classifier:
        Optional classifier spec, ``triggers:<file>`` or ``linear:<file>``.
        Without one the bridge still serves ``fill_mask`` but answers
        ``predict`` with an error reply.
    transport:
        ``stdio`` (serve the parent process over stdin/stdout) or ``tcp``.
    port:
        TCP port to bind; 0 picks a free one.  Ignored for stdio.
    max_batch:
        Upper bound on mask positions accepted in a single ``fill_mask``
        request; larger requests get an error reply.
    """

    model: str
    classifier: str | None = None
    transport: str = "stdio"
    port: int = 0
    max_batch: int = 16

    def __post_init__(self) -> None:
        if not self.model:
            raise ConfigError("model identifier must be non-empty")
        if self.transport not in TRANSPORTS:
            raise ConfigError(
                f"transport must be one of {TRANSPORTS}, got {self.transport!r}"
            )
        if self.port < 0 or self.port > 65535:
            raise ConfigError(f"port out of range: {self.port}")
        if self.max_batch < 1:
            raise ConfigError(f"max_batch must be >= 1, got {self.max_batch}")
