"""Greedy counterfactual search over consistency groups.

The driver tests every singleton perturbation domain first, then runs a
bounded number of iterations in which it picks the most promising
non-flipping candidate (the one whose perturbations pushed the positive
score down the most) and grows it by one group. Domains that produced an
explanation are never grown, and groups belonging to a found explanation
are excluded from later growth, which keeps explanations small and stops
them from absorbing already-explained groups. Duplicated domains are
skipped, so the search also terminates on its own once nothing new is
reachable.

Explanations for one candidate come from the mask filler: all member
positions of every group in the domain are masked at once, each returned
joint assignment that gives every group exactly one consistent, changed
replacement is applied, and the classifier decides whether the prediction
flipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .adapters import Classifier, FillRequest, MaskFiller, Prediction
from .errors import EmptyExplore, InvalidCandidate
from .program import ConsistencyGroup, TokenizedProgram, apply_substitution

METHOD_CFEX = "CFEX"


@dataclass
class Candidate:
    """A perturbation domain: the group ids masked/perturbed together."""

    group_ids: tuple[int, ...]
    best_observed_score: float | None = None

    def sort_key(self) -> tuple:
        score = self.best_observed_score
        return (score if score is not None else math.inf,
                len(self.group_ids), self.group_ids)


@dataclass(frozen=True)
class SearchConfig:
    max_explanation_size: int = 5
    max_iterations: int = 100
    mlm_k: int = 10
    decision_threshold: float = 0.5
    stop_after: int | None = None

    def __post_init__(self) -> None:
        if self.max_explanation_size < 1:
            raise ValueError("max_explanation_size must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.mlm_k < 1:
            raise ValueError("mlm_k must be >= 1")
        if self.stop_after is not None and self.stop_after < 1:
            raise ValueError("stop_after must be >= 1 when set")


@dataclass(frozen=True)
class Explanation:
    """A minimal consistent substitution that flips the prediction."""

    substitution: Mapping[int, tuple[str, str]]
    flipped_score: float
    size: int
    token_indices: frozenset[int]
    method: str = METHOD_CFEX

    def entries(self) -> list[tuple[int, str, str | None]]:
        return [(gid, orig, repl) for gid, (orig, repl) in sorted(self.substitution.items())]

    @property
    def group_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.substitution))


def choose(explore: list[Candidate]) -> Candidate:
    """Pop the most promising candidate: lowest observed positive score,
    then smallest domain, then smallest group-id sequence."""
    if not explore:
        raise EmptyExplore("explore set is empty")
    best = min(range(len(explore)), key=lambda i: explore[i].sort_key())
    return explore.pop(best)


def _consistent_substitution(
    replacements: tuple[str, ...],
    groups: list[ConsistencyGroup],
    positions: list[int],
) -> dict[int, tuple[str, str]] | None:
    """Joint fill -> per-group substitution, or None when the assignment is
    inconsistent within a group, keeps some group unchanged, or proposes an
    unusable token."""
    by_pos = dict(zip(positions, replacements))
    substitution: dict[int, tuple[str, str]] = {}
    for group in groups:
        texts = {by_pos[i] for i in group.member_indices}
        if len(texts) != 1:
            return None
        text = texts.pop()
        if text == group.canonical_text:
            return None
        if not text or any(c.isspace() for c in text):
            return None
        substitution[group.group_id] = (group.canonical_text, text)
    return substitution


def find_counterfactual(
    program: TokenizedProgram,
    classifier: Classifier,
    filler: MaskFiller,
    candidate: Candidate,
    *,
    k: int = 10,
    original: Prediction | None = None,
) -> list[Explanation]:
    """Mask the candidate's groups, try the filler's proposals, and return
    every substitution that flips the prediction.

    Updates candidate.best_observed_score with the lowest positive-class
    score seen across the proposals (flipping or not).
    """
    if not candidate.group_ids:
        raise InvalidCandidate("candidate has no groups")
    groups = [program.group(gid) for gid in candidate.group_ids]
    positions = sorted(set().union(*(g.member_indices for g in groups)))
    if original is None:
        original = classifier.predict(program)
    request = FillRequest.for_program(program, positions, k)
    best = candidate.best_observed_score
    found: list[Explanation] = []
    for proposal in filler.fill_mask(request):
        substitution = _consistent_substitution(proposal.replacements, groups, positions)
        if substitution is None:
            continue
        perturbed = apply_substitution(program, {g: r for g, (_, r) in substitution.items()})
        prediction = classifier.predict(perturbed)
        if best is None or prediction.score < best:
            best = prediction.score
        if prediction.label != original.label:
            found.append(Explanation(
                substitution=substitution,
                flipped_score=prediction.score,
                size=len(groups),
                token_indices=frozenset(positions),
            ))
    candidate.best_observed_score = best
    return found


def _greedy_search(
    program: TokenizedProgram,
    evaluate: Callable[[Candidate], list],
    config: SearchConfig,
    *,
    trace: list | None = None,
) -> list:
    """Shared driver for the substitution search and the removal baseline.

    evaluate() runs one candidate, updates its best_observed_score, and
    returns whatever explanations it produced.
    """
    if not program.tokens:
        raise ValueError("program has no tokens")
    all_gids = [g.group_id for g in program.groups]
    explanations: list = []
    explained: set[int] = set()
    explore: list[Candidate] = []
    visited: set[frozenset[int]] = set()

    def run(candidate: Candidate) -> bool:
        visited.add(frozenset(candidate.group_ids))
        found = evaluate(candidate)
        if found:
            explanations.extend(found)
            explained.update(candidate.group_ids)
        elif len(candidate.group_ids) < config.max_explanation_size:
            explore.append(candidate)
        return config.stop_after is not None and len(explanations) >= config.stop_after

    for gid in all_gids:
        if run(Candidate((gid,))):
            return explanations
    for iteration in range(config.max_iterations):
        if not explore:
            break
        chosen = choose(explore)
        if trace is not None:
            trace.append({
                "iteration": iteration,
                "chosen": chosen.group_ids,
                "explore_sizes": sorted(len(c.group_ids) for c in explore),
            })
        for gid in all_gids:
            if gid in chosen.group_ids or gid in explained:
                continue
            extended = tuple(sorted(chosen.group_ids + (gid,)))
            if frozenset(extended) in visited:
                continue
            if run(Candidate(extended)):
                return explanations
    return explanations


def generate_explanations(
    program: TokenizedProgram,
    classifier: Classifier,
    filler: MaskFiller,
    config: SearchConfig | None = None,
    *,
    trace: list | None = None,
) -> list[Explanation]:
    """Run the full greedy search; returns explanations in discovery order."""
    config = config or SearchConfig()
    original = classifier.predict(program)

    def evaluate(candidate: Candidate) -> list[Explanation]:
        return find_counterfactual(
            program, classifier, filler, candidate,
            k=config.mlm_k, original=original,
        )

    return _greedy_search(program, evaluate, config, trace=trace)


def filter_added_lines(explanations: list, program: TokenizedProgram) -> list:
    """Keep only explanations all of whose touched tokens sit on added lines."""
    from .diffs import LineKind

    def on_added(explanation) -> bool:
        return all(
            program.tokens[i].line_kind is LineKind.ADDED
            for i in explanation.token_indices
        )

    return [e for e in explanations if on_added(e)]
