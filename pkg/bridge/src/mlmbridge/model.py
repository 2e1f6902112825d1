"""Masked-language-model backend for ``fill_mask`` requests.

Turns an engine-side fill request (token sequence, masked positions, k)
into substitution candidates with model probabilities.  Multi-position
requests are answered the same way the engine's built-in filler works:
top-k per position independently, then joints merged best-first by product
likelihood so the combined stream is non-increasing.
"""

from __future__ import annotations

import heapq
from typing import Optional, Sequence

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer
from transformers.utils import logging as hf_logging

from mlmbridge.protocol import ENGINE_MASK

Joint = tuple[tuple[str, ...], float]


class BridgeError(ValueError):
    """A request the backend cannot answer; reported as an error reply."""


class MaskedLmBackend:
    """Deterministic fill-mask inference over a pretrained model."""

    def __init__(self, model_id: str) -> None:
        hf_logging.disable_progress_bar()
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id)
        self.model.eval()
        if self.tokenizer.mask_token_id is None:
            raise BridgeError(f"model {model_id!r} has no mask token")
        self._max_len = int(getattr(self.model.config, "max_position_embeddings", 512))
        # Vocabulary entries we are willing to propose: whole words only.
        # Special tokens and subword continuations ("##ing") are not valid
        # standalone program tokens, and neither is anything with whitespace.
        special = set(self.tokenizer.all_special_ids)
        self._allowed: list[int] = []
        for text, idx in self.tokenizer.get_vocab().items():
            if idx in special or text.startswith("##"):
                continue
            if not text or text != text.strip() or any(c.isspace() for c in text):
                continue
            self._allowed.append(idx)
        self._allowed.sort()
        if not self._allowed:
            raise BridgeError(f"model {model_id!r} has no proposable vocabulary")
        self._allowed_tensor = torch.tensor(self._allowed, dtype=torch.long)

    @property
    def model_max_positions(self) -> int:
        return self._max_len

    def fill(
        self,
        tokens: Sequence[str],
        positions: Sequence[int],
        k: int,
        originals: Optional[Sequence[str]] = None,
    ) -> list[Joint]:
        """Propose joint substitutions for the masked positions.

        Candidates come back sorted by decreasing likelihood (ties by
        replacement text).  When ``originals`` is given, the joint equal to
        it is filtered out, mirroring the client-side contract.
        """
        if not positions:
            raise BridgeError("mask_positions must be non-empty")
        words = list(tokens)
        for pos in positions:
            words[pos] = self.tokenizer.mask_token
        encoding = self.tokenizer(
            words, is_split_into_words=True, return_tensors="pt"
        )
        input_ids = encoding["input_ids"]
        if input_ids.shape[1] > self._max_len:
            raise BridgeError(
                f"request needs {input_ids.shape[1]} model positions, "
                f"limit is {self._max_len}"
            )
        mask_rows = (input_ids[0] == self.tokenizer.mask_token_id).nonzero(
            as_tuple=True
        )[0]
        if mask_rows.numel() != len(positions):
            raise BridgeError(
                "mask token count mismatch: a program token collides with "
                "the model's mask marker"
            )
        with torch.no_grad():
            logits = self.model(**encoding).logits[0]
        probs = torch.softmax(logits[mask_rows], dim=-1)

        # One candidate more than requested per position, so the original
        # joint can be dropped without starving single-mask requests.
        per_position: list[list[tuple[str, float]]] = []
        want = min(k + 1, len(self._allowed))
        for row in probs:
            values, picked = torch.topk(row[self._allowed_tensor], want)
            ranked = sorted(
                (
                    (self.tokenizer.convert_ids_to_tokens(self._allowed[j]), float(v))
                    for v, j in zip(values.tolist(), picked.tolist())
                ),
                key=lambda item: (-item[1], item[0]),
            )
            per_position.append(ranked)

        joints = _best_first_joints(per_position, k + 1)
        if originals is not None:
            original_joint = tuple(originals)
            joints = [j for j in joints if j[0] != original_joint]
        return joints[:k]


def _best_first_joints(
    per_position: list[list[tuple[str, float]]], limit: int
) -> list[Joint]:
    """Merge per-position candidate lists into joint candidates.

    Explores the product space best-first by likelihood product, breaking
    ties by replacement text, and yields at most ``limit`` joints.
    """
    if any(not options for options in per_position):
        return []

    def joint_at(index: tuple[int, ...]) -> Joint:
        texts = []
        product = 1.0
        for options, j in zip(per_position, index):
            text, prob = options[j]
            texts.append(text)
            product *= prob
        return tuple(texts), product

    start = (0,) * len(per_position)
    texts, product = joint_at(start)
    frontier = [(-product, texts, start)]
    seen = {start}
    out: list[Joint] = []
    while frontier and len(out) < limit:
        neg, texts, index = heapq.heappop(frontier)
        out.append((texts, -neg))
        for axis in range(len(index)):
            if index[axis] + 1 >= len(per_position[axis]):
                continue
            bumped = index[:axis] + (index[axis] + 1,) + index[axis + 1 :]
            if bumped in seen:
                continue
            seen.add(bumped)
            next_texts, next_product = joint_at(bumped)
            heapq.heappush(frontier, (-next_product, next_texts, bumped))
    return out
