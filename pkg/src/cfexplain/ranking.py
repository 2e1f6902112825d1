"""Ordering, truncation, and serialization of explanations.

Works for both explanation flavours (substitution and removal); anything
with flipped_score, size, group_ids, token_indices, method, and entries()
ranks the same way. The composite key is a total order, so ranking is
invariant under permutation of its input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .program import TokenizedProgram

DEFAULT_TOP_N = 5


@dataclass(frozen=True)
class RankedExplanations:
    items: tuple
    truncated_to: int


def proximity_span(explanation, program: TokenizedProgram) -> int:
    """Spread of the touched token indices: max minus min."""
    indices = [
        idx
        for gid in explanation.group_ids
        for idx in program.group(gid).member_indices
    ]
    return max(indices) - min(indices)


def _sort_key(explanation, program: TokenizedProgram) -> tuple:
    texts = tuple((orig, repl or "") for _, orig, repl in explanation.entries())
    return (
        explanation.flipped_score,
        explanation.size,
        proximity_span(explanation, program),
        texts,
        explanation.group_ids,
    )


def rank(explanations: Sequence, program: TokenizedProgram,
         truncate: int = DEFAULT_TOP_N) -> RankedExplanations:
    if truncate < 1:
        raise ValueError("truncate must be >= 1")
    ordered = sorted(explanations, key=lambda e: _sort_key(e, program))
    return RankedExplanations(tuple(ordered[:truncate]), truncate)


def explanation_to_json(explanation, program: TokenizedProgram,
                        rank_no: int | None = None) -> dict:
    doc = {
        "method": explanation.method,
        "size": explanation.size,
        "flipped_score": explanation.flipped_score,
        "substitutions": [
            {
                "group_id": gid,
                "original": original,
                "replacement": replacement,
                "member_indices": sorted(program.group(gid).member_indices),
            }
            for gid, original, replacement in explanation.entries()
        ],
    }
    if rank_no is not None:
        doc["rank"] = rank_no
    return doc


def ranked_to_json(ranked: RankedExplanations, program: TokenizedProgram) -> list[dict]:
    return [
        explanation_to_json(expl, program, rank_no=i)
        for i, expl in enumerate(ranked.items, start=1)
    ]
