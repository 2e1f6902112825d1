"""Black-box model contracts plus the built-in reference adapters.

A classifier maps a tokenized program to a (label, score) pair where score
is the positive-class probability. A mask filler proposes replacement
tokens for masked positions. Both see token texts only, so rendering and
whitespace never influence a model.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, runtime_checkable

from .errors import InvalidParams
from .lexer import DEFAULT_KEYWORDS, lex_line
from .program import TokenizedProgram

MASK_SENTINEL = "[MASK]"


@dataclass(frozen=True)
class Prediction:
    label: bool
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score outside [0,1]: {self.score}")


@dataclass(frozen=True)
class FillRequest:
    tokens: tuple[str, ...]
    mask_positions: tuple[int, ...]
    k: int
    originals: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.mask_positions:
            raise ValueError("no mask positions")
        if list(self.mask_positions) != sorted(set(self.mask_positions)):
            raise ValueError("mask positions must be strictly increasing")
        for pos in self.mask_positions:
            if not 0 <= pos < len(self.tokens):
                raise ValueError(f"mask position {pos} out of range")
            if self.tokens[pos] != MASK_SENTINEL:
                raise ValueError(f"position {pos} does not hold the mask sentinel")
        if self.originals is not None and len(self.originals) != len(self.mask_positions):
            raise ValueError("originals must match mask positions")

    @classmethod
    def for_program(cls, program: TokenizedProgram, positions: Iterable[int], k: int) -> "FillRequest":
        positions = sorted(set(positions))
        texts = list(program.token_texts)
        originals = tuple(texts[p] for p in positions)
        for p in positions:
            texts[p] = MASK_SENTINEL
        return cls(tuple(texts), tuple(positions), k, originals)


@dataclass(frozen=True)
class FillCandidate:
    replacements: tuple[str, ...]
    likelihood: float


@runtime_checkable
class Classifier(Protocol):
    def predict(self, program: TokenizedProgram) -> Prediction: ...


@runtime_checkable
class MaskFiller(Protocol):
    def fill_mask(self, request: FillRequest) -> list[FillCandidate]: ...


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class TriggerClassifier:
    """Reference classifier keyed on a fixed set of trigger token texts.

    mode "any": score rises with the number of trigger occurrences,
    sigmoid(hits - 0.5), so a single occurrence already lands positive at
    the default threshold. mode "all": score falls with the number of
    distinct trigger texts missing, sigmoid(0.5 - missing), positive only
    while every trigger text is present somewhere.
    """

    def __init__(self, triggers: Iterable[str], *, mode: str = "any",
                 decision_threshold: float = 0.5) -> None:
        self.triggers = frozenset(triggers)
        if not self.triggers:
            raise InvalidParams("trigger set is empty")
        if mode not in ("any", "all"):
            raise InvalidParams(f"unknown mode {mode!r}")
        if not 0.0 < decision_threshold < 1.0:
            raise InvalidParams(f"threshold outside (0,1): {decision_threshold}")
        self.mode = mode
        self.decision_threshold = decision_threshold

    def predict(self, program: TokenizedProgram) -> Prediction:
        texts = program.token_texts
        if self.mode == "any":
            hits = sum(1 for t in texts if t in self.triggers)
            score = _sigmoid(hits - 0.5)
        else:
            missing = len(self.triggers.difference(texts))
            score = _sigmoid(0.5 - missing)
        return Prediction(score >= self.decision_threshold, score)


class NgramFiller:
    """Bigram mask filler with unigram backoff, trained on a text corpus.

    Each corpus line is lexed with the code lexer and counted as one token
    sequence. A masked position is scored from its immediate neighbours:

        weight(w) = P(w | left) * P(right | w)

    The left factor backs off to the unigram distribution when the left
    neighbour was never seen as a context (or the mask sits at the start),
    and the right factor backs off to unigram(right) when w itself has no
    recorded successors. If the right factor kills every candidate it is
    dropped entirely. Weights are normalized over the survivors; ties break
    lexicographically. Multi-position masks are filled independently per
    position and joined best-first by product likelihood.
    """

    def __init__(self, lines: Iterable[str], *, keywords: frozenset[str] = DEFAULT_KEYWORDS) -> None:
        self._unigram: dict[str, int] = {}
        self._successors: dict[str, dict[str, int]] = {}
        self._total = 0
        for line in lines:
            texts = [lx.text for lx in lex_line(line, keywords=keywords)]
            prev: str | None = None
            for text in texts:
                if text == MASK_SENTINEL:
                    prev = None
                    continue
                self._unigram[text] = self._unigram.get(text, 0) + 1
                self._total += 1
                if prev is not None:
                    row = self._successors.setdefault(prev, {})
                    row[text] = row.get(text, 0) + 1
                prev = text
        self._succ_total = {w: sum(row.values()) for w, row in self._successors.items()}
        self._cache: dict[tuple[str | None, str | None], list[tuple[str, float]]] = {}

    @classmethod
    def from_file(cls, path: str | Path, **kwargs) -> "NgramFiller":
        return cls(Path(path).read_text().splitlines(), **kwargs)

    def _position_candidates(self, left: str | None, right: str | None) -> list[tuple[str, float]]:
        key = (left, right)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if left is not None and left in self._successors:
            total = self._succ_total[left]
            base = {w: c / total for w, c in self._successors[left].items()}
        elif self._total:
            base = {w: c / self._total for w, c in self._unigram.items()}
        else:
            base = {}
        if right is not None and right in self._unigram:
            uni_right = self._unigram[right] / self._total
            weights = {}
            for w, p in base.items():
                row = self._successors.get(w)
                factor = (row.get(right, 0) / self._succ_total[w]) if row else uni_right
                if p * factor > 0:
                    weights[w] = p * factor
            if not weights:
                weights = base
        else:
            weights = base
        norm = sum(weights.values())
        ordered = sorted(weights.items(), key=lambda item: (-item[1], item[0]))
        result = [(w, p / norm) for w, p in ordered]
        self._cache[key] = result
        return result

    def fill_mask(self, request: FillRequest) -> list[FillCandidate]:
        tokens = request.tokens
        per_position: list[list[tuple[str, float]]] = []
        for pos in request.mask_positions:
            left = tokens[pos - 1] if pos > 0 else None
            right = tokens[pos + 1] if pos + 1 < len(tokens) else None
            if left == MASK_SENTINEL:
                left = None
            if right == MASK_SENTINEL:
                right = None
            candidates = self._position_candidates(left, right)[:request.k]
            if not candidates:
                return []
            per_position.append(candidates)
        joints = _best_first_joints(per_position, request.k + 1)
        out = []
        for replacements, likelihood in joints:
            if request.originals is not None and replacements == request.originals:
                continue
            out.append(FillCandidate(replacements, likelihood))
            if len(out) == request.k:
                break
        return out


def _best_first_joints(per_position: list[list[tuple[str, float]]],
                       limit: int) -> list[tuple[tuple[str, ...], float]]:
    """Top joint assignments by product of per-position likelihoods."""
    start = (0,) * len(per_position)

    def entry(idx: tuple[int, ...]):
        product = 1.0
        texts = []
        for lst, i in zip(per_position, idx):
            texts.append(lst[i][0])
            product *= lst[i][1]
        return (-product, tuple(texts), idx)

    heap = [entry(start)]
    seen = {start}
    out: list[tuple[tuple[str, ...], float]] = []
    while heap and len(out) < limit:
        neg, texts, idx = heapq.heappop(heap)
        out.append((texts, -neg))
        for j in range(len(idx)):
            nxt = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
            if nxt[j] < len(per_position[j]) and nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, entry(nxt))
    return out


class NgramClassifier:
    """Flags token streams that look unusual under a corpus bigram model.

    The score is a logistic squash of (average per-token surprisal in bits
    minus nll_threshold), so the label is positive exactly when the stream
    is more surprising than the threshold allows.
    """

    def __init__(self, lines: Iterable[str], *, nll_threshold: float = 8.0,
                 decision_threshold: float = 0.5,
                 keywords: frozenset[str] = DEFAULT_KEYWORDS) -> None:
        filler = NgramFiller(lines, keywords=keywords)
        self._unigram = filler._unigram
        self._successors = filler._successors
        self._succ_total = filler._succ_total
        self._total = filler._total
        self.nll_threshold = nll_threshold
        self.decision_threshold = decision_threshold
        self._floor = 1.0 / (self._total + len(self._unigram) + 1)

    def _prob(self, prev: str | None, word: str) -> float:
        row = self._successors.get(prev) if prev is not None else None
        if row and word in row:
            return row[word] / self._succ_total[prev]
        if self._total and word in self._unigram:
            return self._unigram[word] / self._total
        return self._floor

    def predict(self, program: TokenizedProgram) -> Prediction:
        texts = program.token_texts
        if not texts:
            return Prediction(False, 0.0)
        nll = 0.0
        prev: str | None = None
        for word in texts:
            nll -= math.log2(self._prob(prev, word))
            prev = word
        avg = nll / len(texts)
        score = _sigmoid(avg - self.nll_threshold)
        return Prediction(score >= self.decision_threshold, score)
