"""Selection predicates over dimension instances.

Grammar (case-sensitive identifiers, case-insensitive keywords):

    pred       := or_expr
    or_expr    := and_expr ( OR and_expr )*
    and_expr   := unary ( AND unary )*
    unary      := NOT unary | '(' or_expr ')' | TRUE | FALSE | comparison
    comparison := ident op literal
    op         := = | <> | <= | >= | < | >
    literal    := 'text' (doubled quote escapes) | decimal number

Identifiers may carry diacritics (Densité); matching is exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from .errors import PredicateError
from .values import format_value

COMPARE_OPS = ("=", "<>", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class TruePred:
    def __str__(self):
        return "TRUE"


@dataclass(frozen=True)
class FalsePred:
    def __str__(self):
        return "FALSE"


@dataclass(frozen=True)
class Comparison:
    attr: str
    op: str
    literal: object  # str or Decimal

    def __str__(self):
        if isinstance(self.literal, str):
            lit = "'" + self.literal.replace("'", "''") + "'"
        else:
            lit = format_value(self.literal)
        return f"{self.attr} {self.op} {lit}"


@dataclass(frozen=True)
class Not:
    inner: object

    def __str__(self):
        return f"NOT ({self.inner})"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        # OR binds looser, so it needs parens inside AND; a nested right-hand
        # AND needs them too, or re-parsing would rebuild it left-associative
        left = f"({self.left})" if isinstance(self.left, Or) else str(self.left)
        right = f"({self.right})" if isinstance(self.right, (And, Or)) else str(self.right)
        return f"{left} AND {right}"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        right = f"({self.right})" if isinstance(self.right, Or) else str(self.right)
        return f"{self.left} OR {right}"


TRUE = TruePred()
FALSE = FalsePred()


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<lparen>\()|(?P<rparen>\))"
    r"|(?P<op><>|<=|>=|=|<|>)"
    r"|(?P<string>'(?:[^']|'')*')"
    r"|(?P<number>-?\d+(?:\.\d+)?)"
    r"|(?P<word>\w+)"
    r")",
    re.UNICODE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = len(text) - len(stripped) + 1
            raise PredicateError(f"unexpected character {stripped[0]!r}", column=col)
        kind = m.lastgroup
        if kind is not None:
            tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        node = self.or_expr()
        kind, value, col = self.peek()
        if kind != "end":
            raise PredicateError(f"unexpected trailing {value!r}", column=col)
        return node

    def or_expr(self):
        node = self.and_expr()
        while self._keyword("OR"):
            node = Or(node, self.and_expr())
        return node

    def and_expr(self):
        node = self.unary()
        while self._keyword("AND"):
            node = And(node, self.unary())
        return node

    def unary(self):
        kind, value, col = self.peek()
        if kind == "word" and value.upper() == "NOT":
            self.next()
            return Not(self.unary())
        if kind == "lparen":
            self.next()
            node = self.or_expr()
            kind, value, col = self.next()
            if kind != "rparen":
                raise PredicateError("expected ')'", column=col)
            return node
        if kind == "word" and value.upper() == "TRUE":
            self.next()
            return TRUE
        if kind == "word" and value.upper() == "FALSE":
            self.next()
            return FALSE
        return self.comparison()

    def comparison(self):
        kind, attr, col = self.next()
        if kind != "word":
            raise PredicateError("expected an attribute name", column=col)
        kind, op, col = self.next()
        if kind != "op":
            raise PredicateError("expected a comparison operator", column=col)
        kind, raw, col = self.next()
        if kind == "string":
            literal = raw[1:-1].replace("''", "'")
        elif kind == "number":
            literal = Decimal(raw)
        else:
            raise PredicateError("expected a literal", column=col)
        return Comparison(attr, op, literal)

    def _keyword(self, word: str) -> bool:
        kind, value, _ = self.peek()
        if kind == "word" and value.upper() == word:
            self.next()
            return True
        return False


def parse_predicate(text: str):
    """Parse predicate text; PredicateError diagnostics carry a 1-based column."""
    if not text or not text.strip():
        raise PredicateError("empty predicate", column=1)
    return _Parser(text).parse()


def references(pred) -> set[str]:
    """Attribute names the predicate touches."""
    if isinstance(pred, Comparison):
        return {pred.attr}
    if isinstance(pred, Not):
        return references(pred.inner)
    if isinstance(pred, (And, Or)):
        return references(pred.left) | references(pred.right)
    return set()


def evaluate(pred, row: dict) -> bool:
    """Evaluate against one instance row (attr -> value). Two-valued, no nulls."""
    if isinstance(pred, TruePred):
        return True
    if isinstance(pred, FalsePred):
        return False
    if isinstance(pred, Not):
        return not evaluate(pred.inner, row)
    if isinstance(pred, And):
        return evaluate(pred.left, row) and evaluate(pred.right, row)
    if isinstance(pred, Or):
        return evaluate(pred.left, row) or evaluate(pred.right, row)
    if isinstance(pred, Comparison):
        if pred.attr not in row:
            raise PredicateError(f"unknown attribute {pred.attr!r}")
        actual = row[pred.attr]
        lit = pred.literal
        if isinstance(actual, Decimal) != isinstance(lit, Decimal):
            raise PredicateError(
                f"type mismatch: {pred.attr} is "
                f"{'decimal' if isinstance(actual, Decimal) else 'text'}, "
                f"literal is {'decimal' if isinstance(lit, Decimal) else 'text'}"
            )
        if pred.op == "=":
            return actual == lit
        if pred.op == "<>":
            return actual != lit
        if pred.op == "<":
            return actual < lit
        if pred.op == ">":
            return actual > lit
        if pred.op == "<=":
            return actual <= lit
        if pred.op == ">=":
            return actual >= lit
        raise PredicateError(f"unknown operator {pred.op!r}")
    raise PredicateError(f"not a predicate node: {pred!r}")
