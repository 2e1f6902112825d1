"""Serve a fill-mask language model over the counterfactual engine's wire protocol.

The bridge wraps a Hugging Face masked-language model (and, optionally, a
lightweight classifier) behind the newline-delimited JSON protocol that the
`cfexplain` engine speaks: ``ping``, ``predict`` and ``fill_mask`` requests,
one JSON object per line.  It can run over stdio (one process per adapter) or
over TCP (one shared server).
"""

from mlmbridge.config import BridgeConfig, ConfigError
from mlmbridge.classifiers import (
    LinearCountClassifier,
    TriggerListClassifier,
    load_classifier,
)
from mlmbridge.model import BridgeError, MaskedLmBackend
from mlmbridge.protocol import (
    ENGINE_MASK,
    PROTOCOL_VERSION,
    RESPONSE_SCHEMAS,
    response_kind,
    validate_response,
)
from mlmbridge.server import Bridge, serve, serve_stream

__all__ = [
    "Bridge",
    "BridgeConfig",
    "BridgeError",
    "ConfigError",
    "ENGINE_MASK",
    "LinearCountClassifier",
    "MaskedLmBackend",
    "PROTOCOL_VERSION",
    "RESPONSE_SCHEMAS",
    "TriggerListClassifier",
    "load_classifier",
    "response_kind",
    "serve",
    "serve_stream",
    "validate_response",
]
