"""Tokenizer for MiniC source text."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = {
    "int",
    "void",
    "if",
    "else",
    "while",
    "for",
    "switch",
    "case",
    "default",
    "goto",
    "return",
    "break",
    "continue",
}

TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||")
ONE_CHAR_OPS = "+-*/%<>!&=(){}[];:,"

ESCAPES = {
    "n": 10,
    "t": 9,
    "r": 13,
    "v": 11,
    "f": 12,
    "0": 0,
    "\\": 92,
    "'": 39,
    '"': 34,
}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "num" | "op" | "kw" | "eof"
    text: str
    line: int
    col: int


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int = 1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                advance()
            continue
        if text.startswith("/*", i):
            start_line, start_col = line, col
            advance(2)
            while i < n and not text.startswith("*/", i):
                advance()
            if i >= n:
                raise LexError("unterminated block comment", start_line, start_col)
            advance(2)
            continue
        if c.isdigit():
            start = i
            start_line, start_col = line, col
            while i < n and text[i].isdigit():
                advance()
            toks.append(Token("num", text[start:i], start_line, start_col))
            continue
        if c.isalpha() or c == "_":
            start = i
            start_line, start_col = line, col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                advance()
            word = text[start:i]
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, start_line, start_col))
            continue
        if c == "'":
            start_line, start_col = line, col
            advance()
            if i >= n:
                raise LexError("unterminated char literal", start_line, start_col)
            if text[i] == "\\":
                advance()
                if i >= n or text[i] not in ESCAPES:
                    raise LexError("bad escape in char literal", start_line, start_col)
                value = ESCAPES[text[i]]
                advance()
            else:
                value = ord(text[i])
                advance()
            if i >= n or text[i] != "'":
                raise LexError("unterminated char literal", start_line, start_col)
            advance()
            toks.append(Token("num", str(value), start_line, start_col))
            continue
        two = text[i : i + 2]
        if two in TWO_CHAR_OPS:
            toks.append(Token("op", two, line, col))
            advance(2)
            continue
        if c in ONE_CHAR_OPS:
            toks.append(Token("op", c, line, col))
            advance()
            continue
        raise LexError(f"unexpected character {c!r}", line, col)

    toks.append(Token("eof", "", line, col))
    return toks
