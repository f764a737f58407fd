"""Shared low-level text helpers for the parsers."""

from __future__ import annotations

from ..errors import ParseError


def strip_comments(text: str, line_comment: str = "//", block: bool = True) -> str:
    """Blank out comments while preserving line structure.

    Block comments become spaces (newlines inside are kept) so token line
    numbers stay accurate.
    """
    out = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if block and text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated block comment", text.count("\n", 0, i) + 1)
            for k in range(i, j + 2):
                out.append("\n" if text[k] == "\n" else " ")
            i = j + 2
        elif line_comment and text.startswith(line_comment, i):
            j = text.find("\n", i)
            if j < 0:
                j = n
            out.append(" " * (j - i))
            i = j
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize_with_lines(text: str, punctuation: str = "();,.=") -> list[tuple[str, int]]:
    """Whitespace tokenizer that splits the given punctuation characters
    into single-character tokens and tags every token with its line."""
    tokens: list[tuple[str, int]] = []
    word = []
    line = 1
    word_line = 1
    for c in text:
        if c == "\n":
            if word:
                tokens.append(("".join(word), word_line))
                word = []
            line += 1
        elif c.isspace():
            if word:
                tokens.append(("".join(word), word_line))
                word = []
        elif c in punctuation:
            if word:
                tokens.append(("".join(word), word_line))
                word = []
            tokens.append((c, line))
        else:
            if not word:
                word_line = line
            word.append(c)
    if word:
        tokens.append(("".join(word), word_line))
    return tokens


class TokenCursor:
    """Sequential reader over (token, line) pairs with parse-error helpers."""

    def __init__(self, tokens: list[tuple[str, int]]):
        self.tokens = tokens
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.tokens)

    @property
    def line(self) -> int:
        if self.eof():
            return self.tokens[-1][1] if self.tokens else 1
        return self.tokens[self.pos][1]

    def peek(self) -> str | None:
        if self.eof():
            return None
        return self.tokens[self.pos][0]

    def next(self) -> str:
        if self.eof():
            raise ParseError("unexpected end of input", self.line)
        tok = self.tokens[self.pos][0]
        self.pos += 1
        return tok

    def expect(self, want: str) -> str:
        tok = self.next()
        if tok != want:
            raise ParseError(f"expected '{want}', got '{tok}'", self.tokens[self.pos - 1][1])
        return tok

    def back(self):
        self.pos -= 1
