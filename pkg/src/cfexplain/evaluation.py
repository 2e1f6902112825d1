"""Comparing explanation methods against human rationales.

A rationale is the set of token indices a human marked as the reason for
the label. An explanation counts as aligned when at least half of its
touched tokens fall inside the rationale (boundary inclusive; integer
arithmetic, no float comparison). Between two methods, alignment wins;
among aligned explanations the shortest wins; equal sizes tie.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .program import TokenizedProgram


class Verdict(str, Enum):
    WIN = "Win"
    LOSS = "Loss"
    TIE = "Tie"


@dataclass(frozen=True)
class Rationale:
    diff_id: str
    attributed_indices: frozenset[int]

    @classmethod
    def from_json(cls, doc: Mapping) -> "Rationale":
        return cls(str(doc["diff_id"]), frozenset(int(i) for i in doc["attributed_indices"]))

    @classmethod
    def load(cls, path: str | Path) -> "Rationale":
        return cls.from_json(json.loads(Path(path).read_text()))

    def fits(self, program: TokenizedProgram) -> bool:
        return all(0 <= i < len(program.tokens) for i in self.attributed_indices)


@dataclass(frozen=True)
class MethodStats:
    count: int
    diff_size: int
    avg_size: float | None
    min_size: int | None
    max_size: int | None

    @classmethod
    def from_explanations(cls, explanations: Sequence, diff_size: int) -> "MethodStats":
        if not explanations:
            return cls(0, diff_size, None, None, None)
        sizes = [e.size for e in explanations]
        return cls(len(sizes), diff_size, sum(sizes) / len(sizes), min(sizes), max(sizes))


@dataclass(frozen=True)
class ComparisonOutcome:
    diff_id: str
    verdicts: dict[str, Verdict]
    aligned: dict[str, bool]
    stats: dict[str, MethodStats]


def alignment(explanation, rationale: Rationale, *,
              denominator: str = "explanation") -> bool:
    """True when >= 50% of the denominator set overlaps the other side."""
    touched = explanation.token_indices
    inter = len(touched & rationale.attributed_indices)
    if denominator == "explanation":
        denom = len(touched)
    elif denominator == "rationale":
        denom = len(rationale.attributed_indices)
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    if denom == 0:
        return False
    return 2 * inter >= denom


def decide_win(
    cfex_top,
    sedc_top,
    rationale: Rationale,
    *,
    diff_id: str = "",
    diff_size: int = 0,
    cfex_all: Sequence | None = None,
    sedc_all: Sequence | None = None,
    denominator: str = "explanation",
) -> ComparisonOutcome:
    """Compare the two methods' top explanations against one rationale.

    cfex_top/sedc_top are RankedExplanations; the *_all lists, when given,
    feed the summary statistics so counts reflect everything found rather
    than the truncated view.
    """
    sides = [("CFEX", cfex_top, cfex_all), ("SEDC", sedc_top, sedc_all)]
    best_aligned: dict[str, int | None] = {}
    aligned: dict[str, bool] = {}
    stats: dict[str, MethodStats] = {}
    for label, top, full in sides:
        hits = [e.size for e in top.items if alignment(e, rationale, denominator=denominator)]
        best_aligned[label] = min(hits) if hits else None
        aligned[label] = bool(hits)
        source = full if full is not None else list(top.items)
        stats[label] = MethodStats.from_explanations(source, diff_size)
    a, b = best_aligned["CFEX"], best_aligned["SEDC"]
    if a is None and b is None:
        verdicts = {"CFEX": Verdict.LOSS, "SEDC": Verdict.LOSS}
    elif b is None or (a is not None and a < b):
        verdicts = {"CFEX": Verdict.WIN, "SEDC": Verdict.LOSS}
    elif a is None or b < a:
        verdicts = {"CFEX": Verdict.LOSS, "SEDC": Verdict.WIN}
    else:
        verdicts = {"CFEX": Verdict.TIE, "SEDC": Verdict.TIE}
    return ComparisonOutcome(diff_id, verdicts, aligned, stats)


@dataclass(frozen=True)
class Report:
    markdown: str
    data: dict


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text else "0"


def report_table(outcomes: Sequence[ComparisonOutcome]) -> Report:
    """Render per-diff per-method rows plus wins-or-ties summary lines."""
    if not outcomes:
        raise ValueError("no outcomes to report")
    header = "| Diff | Method | # Exp | Size | Avg | Min | Max | Wins |"
    rule = "| --- | --- | --- | --- | --- | --- | --- | --- |"
    lines = [header, rule]
    rows = []
    totals = {"CFEX": 0, "SEDC": 0}
    wins_or_ties = {"CFEX": 0, "SEDC": 0}
    for outcome in outcomes:
        for label in ("CFEX", "SEDC"):
            st = outcome.stats[label]
            verdict = outcome.verdicts[label]
            totals[label] += 1
            ok = verdict in (Verdict.WIN, Verdict.TIE)
            if ok:
                wins_or_ties[label] += 1
            marker = "x" if ok else ""
            if st.count == 0:
                cells = [outcome.diff_id, label, "-", "", "", "", "", marker]
            else:
                cells = [
                    outcome.diff_id, label, str(st.count), str(st.diff_size),
                    _fmt(st.avg_size), _fmt(st.min_size), _fmt(st.max_size), marker,
                ]
            lines.append("| " + " | ".join(cells) + " |")
            rows.append({
                "diff_id": outcome.diff_id,
                "method": label,
                "count": st.count,
                "diff_size": st.diff_size,
                "avg_size": st.avg_size,
                "min_size": st.min_size,
                "max_size": st.max_size,
                "aligned": outcome.aligned[label],
                "verdict": verdict.value,
                "win_marker": marker,
            })
    lines.append("")
    summary = {}
    for label in ("CFEX", "SEDC"):
        lines.append(f"{label} wins-or-ties {wins_or_ties[label]}/{totals[label]}")
        summary[label] = {
            "wins_or_ties": wins_or_ties[label],
            "total": totals[label],
            "wins": sum(1 for o in outcomes if o.verdicts[label] is Verdict.WIN),
            "ties": sum(1 for o in outcomes if o.verdicts[label] is Verdict.TIE),
            "losses": sum(1 for o in outcomes if o.verdicts[label] is Verdict.LOSS),
        }
    markdown = "\n".join(lines) + "\n"
    return Report(markdown, {"rows": rows, "summary": summary})
