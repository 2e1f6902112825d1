"""Occlusion baseline: explain by deleting groups instead of renaming them.

Shares the greedy driver with the substitution search but never consults a
mask filler: a candidate is evaluated by removing all member tokens of its
groups and re-classifying what is left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .adapters import Classifier
from .program import TokenizedProgram, remove_groups
from .search import Candidate, SearchConfig, _greedy_search

METHOD_SEDC = "SEDC"


@dataclass(frozen=True)
class RemovalExplanation:
    """A set of removed groups that flips the prediction."""

    removed: Mapping[int, str]
    flipped_score: float
    size: int
    token_indices: frozenset[int]
    method: str = METHOD_SEDC

    def entries(self) -> list[tuple[int, str, str | None]]:
        return [(gid, orig, None) for gid, orig in sorted(self.removed.items())]

    @property
    def group_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.removed))


def sedc_explain(
    program: TokenizedProgram,
    classifier: Classifier,
    config: SearchConfig | None = None,
    *,
    trace: list | None = None,
) -> list[RemovalExplanation]:
    config = config or SearchConfig()
    original = classifier.predict(program)
    n_tokens = len(program.tokens)

    def evaluate(candidate: Candidate) -> list[RemovalExplanation]:
        groups = [program.group(gid) for gid in candidate.group_ids]
        positions = sorted(set().union(*(g.member_indices for g in groups)))
        if len(positions) == n_tokens:
            # removing every token leaves nothing to classify
            return []
        reduced = remove_groups(program, candidate.group_ids)
        prediction = classifier.predict(reduced)
        best = candidate.best_observed_score
        if best is None or prediction.score < best:
            candidate.best_observed_score = prediction.score
        if prediction.label != original.label:
            return [RemovalExplanation(
                removed={g.group_id: g.canonical_text for g in groups},
                flipped_score=prediction.score,
                size=len(groups),
                token_indices=frozenset(positions),
            )]
        return []

    return _greedy_search(program, evaluate, config, trace=trace)
