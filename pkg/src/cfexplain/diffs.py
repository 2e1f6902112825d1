"""Parsing of line-prefixed code diffs.

A diff here is plain text, one hunk, no file headers: lines starting with
"+" were added, lines starting with "-" were deleted, everything else is
context.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyInput


class LineKind(str, Enum):
    CONTEXT = "Context"
    ADDED = "Added"
    DELETED = "Deleted"


@dataclass(frozen=True)
class DiffLine:
    kind: LineKind
    text: str
    line_no: int


@dataclass(frozen=True)
class Diff:
    lines: tuple[DiffLine, ...]
    source_name: str = "<diff>"


def parse_diff(text: str, source_name: str = "<diff>") -> Diff:
    """Split raw diff text into classified lines.

    The +/- marker is stripped from the stored text; context lines are kept
    verbatim. line_no is the 1-based position inside the diff text, so blank
    lines still occupy a slot.
    """
    raw = text.splitlines()
    if not raw:
        raise EmptyInput(f"{source_name}: no lines")
    lines = []
    for i, line in enumerate(raw, start=1):
        if line.startswith("+"):
            lines.append(DiffLine(LineKind.ADDED, line[1:], i))
        elif line.startswith("-"):
            lines.append(DiffLine(LineKind.DELETED, line[1:], i))
        else:
            lines.append(DiffLine(LineKind.CONTEXT, line, i))
    return Diff(tuple(lines), source_name)
