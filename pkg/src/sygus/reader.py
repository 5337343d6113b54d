"""S-expression reader for SyGuS text.

The reader is lossless: every node keeps the lexeme it was read from and a
source span, so printing a tree gives back text that re-reads to the same
tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SygusError

RESERVED_WORDS = frozenset(
    [
        "!",
        "_",
        "check-synth",
        "Constant",
        "chc-constraint",
        "constraint",
        "declare-correctness-cex-oracle",
        "declare-correctness-oracle",
        "declare-datatype",
        "declare-datatypes",
        "declare-oracle-fun",
        "declare-sort",
        "declare-var",
        "declare-weight",
        "define-fun",
        "define-sort",
        "exists",
        "forall",
        "inv-constraint",
        "let",
        "optimize-synth",
        "oracle-assume",
        "oracle-constraint",
        "oracle-constraint-cex",
        "oracle-constraint-io",
        "oracle-constraint-membership",
        "oracle-constraint-negwitness",
        "oracle-constraint-poswitness",
        "set-feature",
        "set-info",
        "set-logic",
        "set-option",
        "synth-fun",
        "Variable",
    ]
)

SYMBOL_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+-*&|!~<>=/%?.$^"
)

NUMERAL_RE = re.compile(r"(0|[1-9][0-9]*)\Z")
DECIMAL_RE = re.compile(r"(0|[1-9][0-9]*)\.[0-9]+\Z")
HEX_RE = re.compile(r"#x[0-9A-Fa-f]+\Z")
BINARY_RE = re.compile(r"#b[01]+\Z")

ATOM_KINDS = ("symbol", "keyword", "numeral", "decimal", "boolean", "hex", "binary", "string")


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    offset: int
    length: int

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(frozen=True, eq=False)
class SExpr:
    kind: str
    text: str = ""
    children: tuple["SExpr", ...] = ()
    span: Span | None = field(default=None, repr=False)

    @property
    def is_list(self) -> bool:
        return self.kind == "list"

    @property
    def is_symbol(self) -> bool:
        return self.kind == "symbol"

    def __len__(self):
        return len(self.children)

    def __getitem__(self, i):
        return self.children[i]

    def __iter__(self):
        return iter(self.children)

    def key(self):
        """Structural identity, ignoring spans."""
        if self.kind == "list":
            return ("list", tuple(c.key() for c in self.children))
        return (self.kind, self.text)

    def __eq__(self, other):
        return isinstance(other, SExpr) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def string_value(self) -> str:
        assert self.kind == "string"
        return decode_string(self.text)

    def __str__(self):
        return print_sexpr(self)


def decode_string(lexeme: str) -> str:
    return lexeme[1:-1].replace('""', '"')


def encode_string(value: str) -> str:
    return '"' + value.replace('"', '""') + '"'


def is_reserved(word: str) -> bool:
    return word in RESERVED_WORDS or classify_atom(word) not in ("symbol", "keyword")


def classify_atom(word: str) -> str:
    if word.startswith('"'):
        return "string"
    if word in ("true", "false"):
        return "boolean"
    if word.startswith(":"):
        return "keyword"
    if word.startswith("#x"):
        return "hex"
    if word.startswith("#b"):
        return "binary"
    if NUMERAL_RE.match(word):
        return "numeral"
    if DECIMAL_RE.match(word):
        return "decimal"
    return "symbol"


class _Scanner:
    def __init__(self, text: str, allow_newlines_in_strings: bool):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.allow_newlines = allow_newlines_in_strings

    def error(self, msg, start=None):
        line, col, off = start if start else (self.line, self.col, self.pos)
        raise SygusError("E-PARSE", msg, Span(line, col, off, 1))

    def advance(self, n=1):
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_blank(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c in " \t\r\n\f\v":
                self.advance()
            elif c == ";":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self.advance()
            else:
                break

    def read_string(self):
        start = (self.line, self.col, self.pos)
        text = self.text
        self.advance()
        while True:
            if self.pos >= len(text):
                self.error("unterminated string literal", start)
            c = text[self.pos]
            if c == '"':
                if self.pos + 1 < len(text) and text[self.pos + 1] == '"':
                    self.advance(2)
                    continue
                self.advance()
                break
            if c == "\n" and not self.allow_newlines:
                self.error("newline inside string literal", start)
            self.advance()
        lexeme = text[start[2] : self.pos]
        return SExpr("string", lexeme, (), Span(start[0], start[1], start[2], len(lexeme)))

    def read_atom(self):
        start = (self.line, self.col, self.pos)
        text = self.text
        while self.pos < len(text) and text[self.pos] not in ' \t\r\n\f\v();"':
            self.advance()
        word = text[start[2] : self.pos]
        span = Span(start[0], start[1], start[2], len(word))
        if len(word) > 1 and word.startswith("|") and word.endswith("|"):
            self.error("quoted symbols are not supported", start)
        kind = classify_atom(word)
        if kind == "hex" and not HEX_RE.match(word):
            self.error(f"malformed hexadecimal literal {word!r}", start)
        elif kind == "binary" and not BINARY_RE.match(word):
            self.error(f"malformed binary literal {word!r}", start)
        elif kind == "symbol":
            if word[0].isdigit():
                self.error(f"symbol may not begin with a digit: {word!r}", start)
            bad = [c for c in word if c not in SYMBOL_CHARS]
            if bad:
                self.error(f"character {bad[0]!r} not allowed in symbol {word!r}", start)
        elif kind == "keyword":
            bad = [c for c in word[1:] if c not in SYMBOL_CHARS]
            if len(word) == 1 or bad:
                self.error(f"malformed keyword {word!r}", start)
        return SExpr(kind, word, (), span)


def read_all(text: str, allow_newlines_in_strings: bool = True) -> list[SExpr]:
    """Read every top-level S-expression in ``text``."""
    sc = _Scanner(text, allow_newlines_in_strings)
    stack: list[tuple[tuple[int, int, int], list[SExpr]]] = []
    top: list[SExpr] = []
    while True:
        sc.skip_blank()
        if sc.pos >= len(text):
            break
        c = text[sc.pos]
        if c == "(":
            stack.append(((sc.line, sc.col, sc.pos), []))
            sc.advance()
            continue
        if c == ")":
            if not stack:
                sc.error("unbalanced ')'")
            sc.advance()
            (line, col, off), items = stack.pop()
            node = SExpr("list", "", tuple(items), Span(line, col, off, sc.pos - off))
        elif c == '"':
            node = sc.read_string()
        else:
            node = sc.read_atom()
        (stack[-1][1] if stack else top).append(node)
    if stack:
        line, col, off = stack[-1][0]
        raise SygusError("E-PARSE", "unbalanced '(': missing ')'", Span(line, col, off, 1))
    return top


def read_one(text: str) -> SExpr:
    items = read_all(text)
    if len(items) != 1:
        raise SygusError("E-PARSE", f"expected exactly one S-expression, found {len(items)}")
    return items[0]


def print_sexpr(e: SExpr) -> str:
    if e.kind == "list":
        return "(" + " ".join(print_sexpr(c) for c in e.children) + ")"
    return e.text


def atom(text: str, kind: str | None = None) -> SExpr:
    return SExpr(kind or classify_atom(text), text)


def lst(*children: SExpr) -> SExpr:
    return SExpr("list", "", tuple(children))
