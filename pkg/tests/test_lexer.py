"""Tokenizer behavior: classification, literals, comments, errors."""

from __future__ import annotations

import pytest

from leader.minic.lexer import LexError, Token, tokenize


def kinds(text):
    toks = tokenize(text)
    assert toks[-1].kind == "eof"
    return [(t.kind, t.text) for t in toks[:-1]]


def test_classifies_keywords_idents_and_numbers():
    assert kinds("int x = 42;") == [
        ("kw", "int"),
        ("ident", "x"),
        ("op", "="),
        ("num", "42"),
        ("op", ";"),
    ]


def test_two_char_operators_win_over_one_char():
    assert kinds("a<=b==c&&d") == [
        ("ident", "a"),
        ("op", "<="),
        ("ident", "b"),
        ("op", "=="),
        ("ident", "c"),
        ("op", "&&"),
        ("ident", "d"),
    ]


def test_char_literals_become_numbers():
    assert kinds("'a'") == [("num", str(ord("a")))]
    assert kinds("' '") == [("num", "32")]


@pytest.mark.parametrize(
    "literal,value",
    [("'\\n'", 10), ("'\\t'", 9), ("'\\r'", 13), ("'\\v'", 11),
     ("'\\f'", 12), ("'\\0'", 0), ("'\\\\'", 92), ("'\\''", 39)],
)
def test_char_escapes(literal, value):
    assert kinds(literal) == [("num", str(value))]


def test_line_and_block_comments_are_skipped():
    text = "int a; // trailing\n/* block\nspanning */ int b;"
    assert kinds(text) == [
        ("kw", "int"), ("ident", "a"), ("op", ";"),
        ("kw", "int"), ("ident", "b"), ("op", ";"),
    ]


def test_positions_track_lines_and_columns():
    toks = tokenize("int x;\n  x = 1;")
    assert toks[0] == Token("kw", "int", 1, 1)
    assert toks[3].line == 2 and toks[3].col == 3


def test_unterminated_block_comment_raises():
    with pytest.raises(LexError):
        tokenize("int a; /* never closed")


def test_unterminated_char_literal_raises():
    with pytest.raises(LexError):
        tokenize("'a")


def test_bad_escape_raises():
    with pytest.raises(LexError):
        tokenize("'\\q'")


def test_unexpected_character_raises():
    with pytest.raises(LexError) as exc:
        tokenize("int $x;")
    assert "$" in str(exc.value)
