"""Lightweight classifiers the bridge can serve ``predict`` with.

Both classifiers map a token sequence to ``(label, score)`` where the score
is a positive-class probability in [0, 1].  They exist so the bridge can
stand in for a real diff classifier during integration runs without pulling
in a second model.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from pathlib import Path


class TriggerListClassifier:
    """Flag programs containing any word from a fixed trigger list.

    The score grows with the number of trigger occurrences but stays below
    one: ``hits / (hits + 1)``.  Zero hits give label False at score 0.
    """

    def __init__(self, triggers: set[str]) -> None:
        if not triggers:
            raise ValueError("trigger set must be non-empty")
        self.triggers = frozenset(triggers)

    @classmethod
    def from_file(cls, path: str | Path) -> "TriggerListClassifier":
        words: set[str] = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
        return cls(words)

    def predict(self, tokens: list[str]) -> tuple[bool, float]:
        hits = sum(1 for tok in tokens if tok in self.triggers)
        score = hits / (hits + 1)
        return hits > 0, score


class LinearCountClassifier:
    """Logistic regression over token counts.

    The weight file is JSON: ``{"weights": {"word": 1.5, ...}, "bias": -2.0,
    "threshold": 0.5}``.  Unknown tokens contribute nothing.
    """

    def __init__(
        self,
        weights: dict[str, float],
        bias: float = 0.0,
        threshold: float = 0.5,
    ) -> None:
        if not 0.0 < threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {threshold}")
        self.weights = dict(weights)
        self.bias = float(bias)
        self.threshold = float(threshold)

    @classmethod
    def from_file(cls, path: str | Path) -> "LinearCountClassifier":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict) or "weights" not in doc:
            raise ValueError(f"{path}: expected an object with a 'weights' key")
        weights = doc["weights"]
        if not isinstance(weights, dict) or not all(
            isinstance(k, str) and isinstance(v, (int, float))
            for k, v in weights.items()
        ):
            raise ValueError(f"{path}: 'weights' must map words to numbers")
        return cls(
            {k: float(v) for k, v in weights.items()},
            bias=float(doc.get("bias", 0.0)),
            threshold=float(doc.get("threshold", 0.5)),
        )

    def predict(self, tokens: list[str]) -> tuple[bool, float]:
        counts = Counter(tokens)
        z = self.bias + sum(
            self.weights[word] * n for word, n in counts.items() if word in self.weights
        )
        if z >= 0:
            score = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            score = ez / (1.0 + ez)
        return score >= self.threshold, score


def load_classifier(spec: str):
    """Build a classifier from a ``kind:path`` spec string."""
    kind, sep, path = spec.partition(":")
    if not sep or not path:
        raise ValueError(f"classifier spec must look like 'kind:path', got {spec!r}")
    if kind == "triggers":
        return TriggerListClassifier.from_file(path)
    if kind == "linear":
        return LinearCountClassifier.from_file(path)
    raise ValueError(f"unknown classifier kind {kind!r} (use 'triggers' or 'linear')")
