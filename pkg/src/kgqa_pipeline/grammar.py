"""Validation of repaired queries against the template mini-grammar.

Covered shapes (keywords case-insensitive):

    (select [distinct] VAR+ | ask) [where] { TRIPLE ("." TRIPLE)* [FILTER] }
        [group by VAR+] [order by KEY+] [limit N]

A TRIPLE is three terms; a term is a variable, an angle-bracketed URI, a
quoted string, or a number. FILTER is a single comparison between such
operands. This is deliberately not full SPARQL.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .uris import ENTITY_URI_RE

_TOKEN_SPEC = [
    ("URI", r"<[^\s<>]+>"),
    ("STRING", r'"[^"]*"'),
    ("VAR", r"\?[A-Za-z_][A-Za-z0-9_]*"),
    ("NUMBER", r"-?\d+(?:\.\d+)?"),
    ("OP", r"!=|<=|>=|=|<|>"),
    ("LBRACE", r"\{"),
    ("RBRACE", r"\}"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("DOT", r"\."),
    ("WORD", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("WS", r"\s+"),
    ("JUNK", r"."),
]

_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))

_TERM_KINDS = {"VAR", "URI", "STRING", "NUMBER"}
_OPERAND_KINDS = {"VAR", "STRING", "NUMBER"}


@dataclass(frozen=True)
class QueryDiagnostics:
    valid: bool
    position: Optional[int] = None  # char offset of the first failure
    message: Optional[str] = None


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(query: str) -> list[_Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(query):
        kind = m.lastgroup
        if kind == "WS":
            continue
        tokens.append(_Token(kind, m.group(0), m.start()))
    return tokens


class _Parser:
    def __init__(self, query: str):
        self._query = query
        self._tokens = _tokenize(query)
        self._i = 0

    def _peek(self) -> Optional[_Token]:
        return self._tokens[self._i] if self._i < len(self._tokens) else None

    def _fail(self, message: str):
        tok = self._peek()
        pos = tok.pos if tok else len(self._query)
        raise _ParseFailure(pos, message)

    def _take(self) -> _Token:
        tok = self._peek()
        if tok is None:
            self._fail("unexpected end of query")
        self._i += 1
        return tok

    def _keyword(self, *words: str) -> bool:
        tok = self._peek()
        if tok and tok.kind == "WORD" and tok.text.lower() in words:
            self._i += 1
            return True
        return False

    def _expect_keyword(self, word: str):
        if not self._keyword(word):
            self._fail(f"expected '{word}'")

    def _expect(self, kind: str) -> _Token:
        tok = self._peek()
        if tok is None or tok.kind != kind:
            self._fail(f"expected {kind}")
        return self._take()

    def parse(self) -> None:
        if self._keyword("select"):
            self._keyword("distinct")
            if self._peek() is None or self._peek().kind != "VAR":
                self._fail("expected projection variable")
            while self._peek() and self._peek().kind == "VAR":
                self._take()
            self._where_block()
            self._trailing()
        elif self._keyword("ask"):
            self._where_block()
        else:
            self._fail("expected 'select' or 'ask'")
        if self._peek() is not None:
            self._fail("trailing content after query")

    def _where_block(self) -> None:
        self._keyword("where")
        self._expect("LBRACE")
        self._triple()
        while True:
            tok = self._peek()
            if tok and tok.kind == "DOT":
                self._take()
                self._triple()
            else:
                break
        if self._keyword("filter"):
            self._filter_body()
        self._expect("RBRACE")

    def _triple(self) -> None:
        for _ in range(3):
            tok = self._peek()
            if tok is None or tok.kind not in _TERM_KINDS:
                self._fail("expected triple term")
            if tok.kind == "URI" and not ENTITY_URI_RE.match(tok.text):
                self._fail("malformed URI term")
            self._take()

    def _filter_body(self) -> None:
        self._expect("LPAREN")
        self._operand()
        self._expect("OP")
        self._operand()
        self._expect("RPAREN")

    def _operand(self) -> None:
        tok = self._peek()
        if tok is None or tok.kind not in _OPERAND_KINDS:
            self._fail("expected filter operand")
        self._take()

    def _trailing(self) -> None:
        while True:
            if self._keyword("group"):
                self._expect_keyword("by")
                self._expect("VAR")
                while self._peek() and self._peek().kind == "VAR":
                    self._take()
            elif self._keyword("order"):
                self._expect_keyword("by")
                self._order_key()
                while self._peek() and (
                    self._peek().kind == "VAR"
                    or (self._peek().kind == "WORD" and self._peek().text.lower() in ("asc", "desc"))
                ):
                    self._order_key()
            elif self._keyword("limit"):
                self._expect("NUMBER")
            else:
                return

    def _order_key(self) -> None:
        if self._keyword("asc", "desc"):
            self._expect("LPAREN")
            self._expect("VAR")
            self._expect("RPAREN")
        else:
            self._expect("VAR")


class _ParseFailure(Exception):
    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"{message} at offset {position}")


def diagnose_query(query: str) -> QueryDiagnostics:
    """Like validate_query but reports the first parse-failure position."""
    try:
        _Parser(query).parse()
    except _ParseFailure as f:
        return QueryDiagnostics(False, f.position, f.message)
    return QueryDiagnostics(True)


def validate_query(query: str) -> bool:
    return diagnose_query(query).valid
