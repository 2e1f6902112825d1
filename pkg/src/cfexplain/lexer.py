"""A small grammar-free lexer for C-family-looking source lines.

The lexer never fails: anything it cannot classify becomes a one-character
punctuation token. Identifiers may start with ``$`` or ``_`` so PHP/Perl
style variables stay single tokens. String literals run to the closing
quote (or end of line when unterminated) and are then split on internal
whitespace, because downstream token streams must stay whitespace-free.
"""

from __future__ import annotations

import re
from enum import Enum
from pathlib import Path
from typing import NamedTuple


class TokenKind(str, Enum):
    IDENTIFIER = "Identifier"
    KEYWORD = "Keyword"
    NUMBER = "Number"
    STRING = "String"
    OPERATOR = "Operator"
    PUNCT = "Punct"


class Lexeme(NamedTuple):
    col: int
    text: str
    kind: TokenKind


DEFAULT_KEYWORDS = frozenset("""
    abstract and as async await bool boolean break case catch char class
    const continue def default delete do double elif else enum except
    export extends false final finally float fn for from function global
    goto if implements import in int interface is lambda let long namespace
    new not null nullptr of or package pass private protected public raise
    return self short signed sizeof static struct super switch this throw
    throws true try typedef typeof undefined unsigned use using var virtual
    void volatile while with yield
""".split())

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(r"0[xX][0-9a-fA-F]+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")

_OP3 = frozenset(["===", "!==", "<<=", ">>=", "**=", "..."])
_OP2 = frozenset([
    "::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "**",
    "??", "?.",
])
_OP1 = frozenset("+-*/%=<>!&|^~?:.@#\\")
_PUNCT = frozenset("()[]{},;`")


def load_keywords(path: str | Path) -> frozenset[str]:
    """Read a keyword list, one word per line; blank and # lines ignored."""
    words = []
    for line in Path(path).read_text().splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.append(word)
    return frozenset(words)


def _scan_string(text: str, start: int) -> tuple[str, int]:
    quote = text[start]
    j = start + 1
    n = len(text)
    while j < n:
        if text[j] == "\\":
            j += 2
            continue
        if text[j] == quote:
            return text[start:j + 1], j + 1
        j += 1
    return text[start:], n


def lex_line(text: str, *, keywords: frozenset[str] = DEFAULT_KEYWORDS) -> list[Lexeme]:
    """Split one line of code into lexemes with 0-based columns."""
    out: list[Lexeme] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "'\"":
            raw, nxt = _scan_string(text, i)
            k = 0
            while k < len(raw):
                if raw[k].isspace():
                    k += 1
                    continue
                start = k
                while k < len(raw) and not raw[k].isspace():
                    k += 1
                out.append(Lexeme(i + start, raw[start:k], TokenKind.STRING))
            i = nxt
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            kind = TokenKind.KEYWORD if word in keywords else TokenKind.IDENTIFIER
            out.append(Lexeme(i, word, kind))
            i = m.end()
            continue
        if ch.isdigit():
            m = _NUMBER_RE.match(text, i)
            out.append(Lexeme(i, m.group(), TokenKind.NUMBER))
            i = m.end()
            continue
        if text[i:i + 3] in _OP3:
            out.append(Lexeme(i, text[i:i + 3], TokenKind.OPERATOR))
            i += 3
            continue
        if text[i:i + 2] in _OP2:
            out.append(Lexeme(i, text[i:i + 2], TokenKind.OPERATOR))
            i += 2
            continue
        if ch in _OP1:
            out.append(Lexeme(i, ch, TokenKind.OPERATOR))
            i += 1
            continue
        # known punctuation and anything unrecognized: one-char token
        out.append(Lexeme(i, ch, TokenKind.PUNCT))
        i += 1
    return out


def classify_replacement(text: str, keywords: frozenset[str] = DEFAULT_KEYWORDS) -> TokenKind | None:
    """Kind for a token text coming from outside the lexer.

    Returns None when the text does not lex to exactly one lexeme, in which
    case callers should keep whatever kind the replaced token had.
    """
    lexemes = lex_line(text, keywords=keywords)
    if len(lexemes) == 1 and lexemes[0].text == text:
        return lexemes[0].kind
    return None
