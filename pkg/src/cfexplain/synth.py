"""Planted-culprit instances with exactly known counterfactuals.

generate_instance() builds a code-looking diff from three mutually
disjoint vocabularies: body names (the bulk of the program), trigger names
(what a TriggerClassifier in "any" mode keys on), and neutral names (what
the paired filler proposes). Because the classifier fires on any trigger
occurrence and proposals are always neutral, the unique minimal
counterfactual is "replace every trigger group", so expected_min_size
equals n_triggers by construction.

brute_force_oracle() enumerates perturbation domains level by level
(sizes 1..max_size), skipping any domain that contains a group already
covered by a flip found at a smaller size, and evaluates every filler
proposal directly. It shares nothing with the greedy search except the
program/adapter primitives, so it is a fair referee for it.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .adapters import Classifier, FillRequest, MaskFiller, NgramFiller, TriggerClassifier
from .diffs import Diff, DiffLine, LineKind
from .errors import InvalidParams, TooLarge
from .program import TokenizedProgram, apply_substitution, tokenize

_BODY_POOL = (
    "loadConfig", "mergeState", "parseEntry", "renderFrame", "updateCursor",
    "fetchBlock", "scanBuffer", "emitRecord", "syncLedger", "flushBatch",
    "trackOffset", "queueWriter", "readChunk", "splitField", "packHeader",
    "castValue", "drainPool", "wrapHandle", "markDirty", "countRows",
)
_TRIGGER_POOL = (
    "spinLockAll", "blockingJoin", "rawSqlConcat", "unboundedCopy",
    "globalMutate", "busyWaitPoll", "nestedFullScan", "syncNetCall",
    "deepCloneEach",
)
_NEUTRAL_POOL = (
    "calmStep", "lightSlot", "localPart", "plainTask", "quietCell",
    "smallUnit", "sparePage", "tidyNode",
)

# token layouts by statement length; "@" marks an identifier slot
_SHAPES = {
    1: ["@"],
    2: ["return", "@"],
    3: ["@", "=", "@"],
    4: ["@", "(", "@", ")"],
    5: ["@", "=", "@", "(", ")"],
    6: ["@", "=", "@", "(", "@", ")"],
    7: ["@", "=", "@", ".", "@", "(", ")"],
    8: ["@", "=", "@", "(", "@", ",", "@", ")"],
}


@dataclass(frozen=True)
class PlantedInstance:
    diff: Diff
    trigger_groups: frozenset[str]
    neutral_vocab: tuple[str, ...]
    expected_min_size: int
    seed: int
    n_tokens: int
    n_triggers: int

    @property
    def diff_id(self) -> str:
        return f"inst_{self.seed:05d}"


def generate_instance(seed: int, n_tokens: int = 48, n_triggers: int = 1) -> PlantedInstance:
    if not 1 <= n_triggers <= 3:
        raise InvalidParams(f"n_triggers must be 1..3, got {n_triggers}")
    if n_tokens < 10 * n_triggers:
        raise InvalidParams(f"n_tokens must be >= {10 * n_triggers}, got {n_tokens}")
    rng = random.Random(seed)
    triggers = rng.sample(_TRIGGER_POOL, n_triggers)
    body = rng.sample(_BODY_POOL, 8)
    neutral = tuple(sorted(rng.sample(_NEUTRAL_POOL, 6)))

    statements: list[list[str]] = []
    remaining = n_tokens
    while remaining > 8:
        size = rng.choice((5, 6, 7, 8))
        statements.append([rng.choice(body) if t == "@" else t for t in _SHAPES[size]])
        remaining -= size
    statements.append([rng.choice(body) if t == "@" else t for t in _SHAPES[remaining]])

    slots = [
        (si, ti)
        for si, stmt in enumerate(statements)
        for ti, text in enumerate(stmt)
        if stmt[ti] in body and _SHAPES[len(stmt)][ti] == "@"
    ]
    counts = [2 if (i == 0 or rng.random() < 0.5) else 1 for i in range(n_triggers)]
    while sum(counts) > len(slots):
        counts[counts.index(2)] = 1
    picked = iter(rng.sample(slots, sum(counts)))
    for trigger, count in zip(triggers, counts):
        for _ in range(count):
            si, ti = next(picked)
            statements[si][ti] = trigger

    lines = []
    for i, stmt in enumerate(statements, start=1):
        roll = rng.random()
        kind = LineKind.ADDED if roll < 0.5 else (
            LineKind.CONTEXT if roll < 0.75 else LineKind.DELETED)
        lines.append(DiffLine(kind, " ".join(stmt), i))
    instance = PlantedInstance(
        diff=Diff(tuple(lines), f"inst_{seed:05d}"),
        trigger_groups=frozenset(triggers),
        neutral_vocab=neutral,
        expected_min_size=n_triggers,
        seed=seed,
        n_tokens=n_tokens,
        n_triggers=n_triggers,
    )
    assert sum(len(s) for s in statements) == n_tokens
    return instance


def instance_classifier(instance: PlantedInstance, *, decision_threshold: float = 0.5) -> TriggerClassifier:
    return TriggerClassifier(instance.trigger_groups, mode="any",
                             decision_threshold=decision_threshold)


def instance_filler(instance: PlantedInstance) -> NgramFiller:
    """One neutral token per corpus line: a flat unigram proposal table."""
    return NgramFiller(instance.neutral_vocab)


def trigger_group_ids(instance: PlantedInstance, program: TokenizedProgram | None = None) -> frozenset[int]:
    program = program or tokenize(instance.diff)
    return frozenset(
        g.group_id for g in program.groups if g.canonical_text in instance.trigger_groups
    )


def trigger_token_indices(instance: PlantedInstance, program: TokenizedProgram | None = None) -> list[int]:
    program = program or tokenize(instance.diff)
    indices: set[int] = set()
    for g in program.groups:
        if g.canonical_text in instance.trigger_groups:
            indices.update(g.member_indices)
    return sorted(indices)


def explanation_key(explanation) -> frozenset[tuple[int, str | None]]:
    """Canonical identity of an explanation for set comparisons."""
    return frozenset((gid, repl) for gid, _, repl in explanation.entries())


def brute_force_oracle(
    instance: PlantedInstance,
    classifier: Classifier,
    filler: MaskFiller,
    max_size: int = 2,
    *,
    k: int = 10,
    max_groups: int = 60,
) -> set[frozenset[tuple[int, str]]]:
    """Exhaustively find every flipping substitution with domain <= max_size.

    Domains are enumerated level by level; a domain containing any group
    that already flipped at a smaller size is skipped, matching the search
    contract that explained groups are never grown further.
    """
    if max_size < 1:
        raise InvalidParams("max_size must be >= 1")
    program = tokenize(instance.diff)
    if len(program.groups) > max_groups:
        raise TooLarge(f"{len(program.groups)} groups > limit {max_groups}")
    original = classifier.predict(program)
    gids = [g.group_id for g in program.groups]
    found: set[frozenset[tuple[int, str]]] = set()
    explained: set[int] = set()
    for size in range(1, max_size + 1):
        newly: set[int] = set()
        for combo in itertools.combinations(gids, size):
            if explained.intersection(combo):
                continue
            groups = [program.groups[g] for g in combo]
            positions = sorted(set().union(*(g.member_indices for g in groups)))
            request = FillRequest.for_program(program, positions, k)
            for proposal in filler.fill_mask(request):
                by_pos = dict(zip(positions, proposal.replacements))
                substitution: dict[int, str] = {}
                for group in groups:
                    texts = {by_pos[i] for i in group.member_indices}
                    text = texts.pop() if len(texts) == 1 else None
                    if (text is None or text == group.canonical_text
                            or not text or any(c.isspace() for c in text)):
                        substitution = {}
                        break
                    substitution[group.group_id] = text
                if not substitution:
                    continue
                perturbed = apply_substitution(program, substitution)
                if classifier.predict(perturbed).label != original.label:
                    found.add(frozenset(substitution.items()))
                    newly.update(combo)
        explained.update(newly)
    return found


def write_instance(instance: PlantedInstance, directory: str | Path) -> dict[str, Path]:
    """Write <id>.diff, <id>.instance.json, <id>.rationale.json, <id>.triggers.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = {LineKind.ADDED: "+", LineKind.DELETED: "-", LineKind.CONTEXT: " "}
    text = "".join(f"{prefix[line.kind]}{line.text}\n" for line in instance.diff.lines)
    diff_path = directory / f"{instance.diff_id}.diff"
    diff_path.write_text(text)
    sidecar_path = directory / f"{instance.diff_id}.instance.json"
    sidecar_path.write_text(json.dumps({
        "diff_id": instance.diff_id,
        "seed": instance.seed,
        "n_tokens": instance.n_tokens,
        "n_triggers": instance.n_triggers,
        "triggers": sorted(instance.trigger_groups),
        "neutral_vocab": list(instance.neutral_vocab),
        "expected_min_size": instance.expected_min_size,
    }, indent=2, sort_keys=True) + "\n")
    rationale_path = directory / f"{instance.diff_id}.rationale.json"
    rationale_path.write_text(json.dumps({
        "diff_id": instance.diff_id,
        "attributed_indices": trigger_token_indices(instance),
    }, indent=2, sort_keys=True) + "\n")
    triggers_path = directory / f"{instance.diff_id}.triggers.txt"
    triggers_path.write_text("".join(f"{t}\n" for t in sorted(instance.trigger_groups)))
    return {
        "diff": diff_path,
        "instance": sidecar_path,
        "rationale": rationale_path,
        "triggers": triggers_path,
    }


def load_instance(path: str | Path) -> PlantedInstance:
    """Rebuild an instance from its sidecar (or the .diff next to it)."""
    path = Path(path)
    if path.suffix == ".diff":
        path = path.with_suffix(".instance.json")
    doc = json.loads(path.read_text())
    return generate_instance(int(doc["seed"]), int(doc["n_tokens"]), int(doc["n_triggers"]))


def write_fill_corpus(instances: list[PlantedInstance], directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    vocab = sorted({w for inst in instances for w in inst.neutral_vocab})
    path = directory / "fill_corpus.txt"
    path.write_text("".join(f"{w}\n" for w in vocab))
    return path
