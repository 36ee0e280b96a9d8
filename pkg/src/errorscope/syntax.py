"""Deterministic tokenization and syntax-family smart tags.

The tokenizer splits on Unicode whitespace and detaches leading/trailing
punctuation characters as separate tokens; it never guesses grammar.
Missing subject/verb/object tags come exclusively from an ingested syntax
table produced by an external parser.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formats import SyntaxRow

PUNCTUATION_CHARS = frozenset(".,!?;:'\"()")


@dataclass(frozen=True)
class TokenSpan:
    text: str
    byte_start: int
    byte_end: int


def tokenize(text: str) -> list[TokenSpan]:
    """Split into spans with UTF-8 byte offsets.

    Whitespace-separated chunks are emitted whole except that any run of
    leading or trailing punctuation characters is detached one character
    per token, preserving original order.  Interior punctuation (as in
    "what's") stays inside its token.
    """
    spans: list[TokenSpan] = []
    byte_pos = 0
    char_pos = 0
    n = len(text)
    while char_pos < n:
        ch = text[char_pos]
        if ch.isspace():
            byte_pos += len(ch.encode("utf-8"))
            char_pos += 1
            continue
        chunk_start_char = char_pos
        chunk_start_byte = byte_pos
        while char_pos < n and not text[char_pos].isspace():
            byte_pos += len(text[char_pos].encode("utf-8"))
            char_pos += 1
        chunk = text[chunk_start_char:char_pos]
        spans.extend(_split_chunk(chunk, chunk_start_byte))
    return spans


def _split_chunk(chunk: str, byte_start: int) -> list[TokenSpan]:
    lead = 0
    while lead < len(chunk) and chunk[lead] in PUNCTUATION_CHARS:
        lead += 1
    trail = len(chunk)
    while trail > lead and chunk[trail - 1] in PUNCTUATION_CHARS:
        trail -= 1

    pieces: list[str] = []
    pieces.extend(chunk[i] for i in range(lead))
    if trail > lead:
        pieces.append(chunk[lead:trail])
    pieces.extend(chunk[i] for i in range(trail, len(chunk)))

    spans = []
    pos = byte_start
    for piece in pieces:
        size = len(piece.encode("utf-8"))
        spans.append(TokenSpan(piece, pos, pos + size))
        pos += size
    return spans


def is_word_token(token: str) -> bool:
    """Pure-punctuation tokens do not count as words."""
    return any(ch not in PUNCTUATION_CHARS for ch in token)


def word_token_count(text: str, syntax_row: SyntaxRow | None = None) -> int:
    if syntax_row is not None and syntax_row.token_count_override is not None:
        return syntax_row.token_count_override
    return sum(1 for span in tokenize(text) if is_word_token(span.text))


def syntax_tags(
    text: str,
    syntax_row: SyntaxRow | None,
    short_tokens: int = 3,
    long_tokens: int = 15,
) -> frozenset[str]:
    """Length tags from the word-token count plus pass-through missing_*
    flags when a syntax table row is available."""
    tags = set()
    count = word_token_count(text, syntax_row)
    if count > long_tokens:
        tags.add("long_sentence")
    if count < short_tokens:
        tags.add("short_sentence")
    if syntax_row is not None:
        if not syntax_row.has_subject:
            tags.add("missing_subject")
        if not syntax_row.has_verb:
            tags.add("missing_verb")
        if not syntax_row.has_object:
            tags.add("missing_object")
    return frozenset(tags)
