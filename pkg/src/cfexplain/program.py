"""Tokenized diffs and consistency groups.

tokenize() flattens a diff into one 0-indexed token stream. Identifier
tokens with the same text belong to one consistency group so that a rename
touches every occurrence at once; every other token (keywords included) is
a group of its own. Group ids are dense and ordered by first occurrence,
so ``program.groups[gid].group_id == gid`` always holds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping

from .diffs import Diff, LineKind
from .errors import InvalidReplacement, UnknownGroup
from .lexer import DEFAULT_KEYWORDS, TokenKind, classify_replacement, lex_line


@dataclass(frozen=True, slots=True)
class Token:
    index: int
    text: str
    kind: TokenKind
    line_no: int
    col: int
    line_kind: LineKind


@dataclass(frozen=True)
class ConsistencyGroup:
    group_id: int
    member_indices: frozenset[int]
    canonical_text: str


@dataclass(frozen=True)
class TokenizedProgram:
    tokens: tuple[Token, ...]
    groups: tuple[ConsistencyGroup, ...]
    line_kinds: tuple[LineKind, ...]
    source_name: str = "<diff>"

    @cached_property
    def token_texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)

    @cached_property
    def _group_of_token(self) -> dict[int, ConsistencyGroup]:
        mapping: dict[int, ConsistencyGroup] = {}
        for g in self.groups:
            for idx in g.member_indices:
                mapping[idx] = g
        return mapping

    def group(self, group_id: int) -> ConsistencyGroup:
        if not 0 <= group_id < len(self.groups):
            raise UnknownGroup(f"no group {group_id} (have {len(self.groups)})")
        return self.groups[group_id]

    def group_of_token(self, index: int) -> ConsistencyGroup:
        return self._group_of_token[index]


def _build_groups(tokens: Iterable[Token]) -> tuple[ConsistencyGroup, ...]:
    by_ident: dict[str, list[int]] = {}
    order: list[tuple[str | None, list[int]]] = []
    for tok in tokens:
        if tok.kind is TokenKind.IDENTIFIER:
            members = by_ident.get(tok.text)
            if members is None:
                members = []
                by_ident[tok.text] = members
                order.append((tok.text, members))
            members.append(tok.index)
        else:
            order.append((tok.text, [tok.index]))
    return tuple(
        ConsistencyGroup(gid, frozenset(members), text)
        for gid, (text, members) in enumerate(order)
    )


def tokenize(diff: Diff, *, keywords: frozenset[str] = DEFAULT_KEYWORDS) -> TokenizedProgram:
    tokens: list[Token] = []
    for line in diff.lines:
        for lexeme in lex_line(line.text, keywords=keywords):
            tokens.append(Token(
                index=len(tokens),
                text=lexeme.text,
                kind=lexeme.kind,
                line_no=line.line_no,
                col=lexeme.col,
                line_kind=line.kind,
            ))
    return TokenizedProgram(
        tokens=tuple(tokens),
        groups=_build_groups(tokens),
        line_kinds=tuple(line.kind for line in diff.lines),
        source_name=diff.source_name,
    )


def apply_substitution(program: TokenizedProgram, substitution: Mapping[int, str]) -> TokenizedProgram:
    """Replace every member token of each substituted group.

    Raises UnknownGroup for a bad group id and InvalidReplacement for an
    empty or whitespace-bearing replacement. Indices, lines, and the group
    structure are untouched; only texts (and best-effort kinds) change.
    """
    for gid, replacement in substitution.items():
        program.group(gid)
        if not replacement or any(c.isspace() for c in replacement):
            raise InvalidReplacement(f"group {gid}: {replacement!r}")
    tokens = list(program.tokens)
    groups = list(program.groups)
    for gid, replacement in substitution.items():
        group = program.groups[gid]
        kind = classify_replacement(replacement)
        for idx in group.member_indices:
            old = tokens[idx]
            tokens[idx] = replace(old, text=replacement, kind=kind or old.kind)
        groups[gid] = replace(group, canonical_text=replacement)
    return TokenizedProgram(tuple(tokens), tuple(groups), program.line_kinds, program.source_name)


def remove_groups(program: TokenizedProgram, group_ids: Iterable[int]) -> TokenizedProgram:
    """Drop every member token of the given groups and re-index the rest."""
    doomed: set[int] = set()
    for gid in group_ids:
        doomed.update(program.group(gid).member_indices)
    kept = [tok for tok in program.tokens if tok.index not in doomed]
    tokens = tuple(replace(tok, index=i) for i, tok in enumerate(kept))
    return TokenizedProgram(tokens, _build_groups(tokens), program.line_kinds, program.source_name)


def render_diff(program: TokenizedProgram) -> str:
    """Render back to diff text, one space between tokens.

    Context lines get a leading space so that a context line whose first
    token starts with "+" or "-" cannot be misread as added/deleted when
    the output is parsed again.
    """
    prefix = {LineKind.ADDED: "+", LineKind.DELETED: "-", LineKind.CONTEXT: " "}
    by_line: dict[int, list[str]] = {}
    for tok in program.tokens:
        by_line.setdefault(tok.line_no, []).append(tok.text)
    lines = []
    for line_no, kind in enumerate(program.line_kinds, start=1):
        lines.append(prefix[kind] + " ".join(by_line.get(line_no, [])))
    return "\n".join(lines) + "\n"


def program_to_json(program: TokenizedProgram) -> dict:
    return {
        "source_name": program.source_name,
        "tokens": [
            {
                "index": t.index,
                "text": t.text,
                "kind": t.kind.value,
                "line_no": t.line_no,
                "col": t.col,
                "line_kind": t.line_kind.value,
            }
            for t in program.tokens
        ],
        "groups": [
            {
                "group_id": g.group_id,
                "members": sorted(g.member_indices),
                "text": g.canonical_text,
            }
            for g in program.groups
        ],
    }
