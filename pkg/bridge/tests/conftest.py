"""Shared fixtures: one loaded backend/bridge per session."""

from pathlib import Path

import pytest

from mlmbridge.config import BridgeConfig
from mlmbridge.model import MaskedLmBackend
from mlmbridge.server import Bridge

FIXTURES = Path(__file__).parent / "fixtures"
MODEL_DIR = FIXTURES / "tiny-mlm"
TRIGGERS_FILE = FIXTURES / "triggers.txt"

# Words the fixture model is able to propose (its vocabulary minus
# special tokens); mirrors tools/make_tiny_mlm.py.
MODEL_WORDS = frozenset(
    [
        "the", "cat", "sat", "on", "mat", "dog", "ran", "code", "diff", "line",
        "token", "word", "fast", "slow", "gen", "handle", "store", "render",
        "simple", "cached", "page", "node", "unit", "alpha", "beta", "gamma",
        "delta", "quiet", "calm", "tidy",
    ]
)


@pytest.fixture(scope="session")
def backend() -> MaskedLmBackend:
    return MaskedLmBackend(str(MODEL_DIR))


@pytest.fixture(scope="session")
def bridge() -> Bridge:
    return Bridge(
        BridgeConfig(
            model=str(MODEL_DIR),
            classifier=f"triggers:{TRIGGERS_FILE}",
        )
    )
