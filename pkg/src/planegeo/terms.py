"""Condition description language (CDL) terms: parsing and rendering.

The CDL grammar is deliberately small: ``Name(arg,...)`` with nested calls,
bare uppercase entity tokens ("AD" means the ordered point list [A, D]),
exact rational numbers, and lowercase single-letter variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class CdlSyntaxError(Exception):
    """Raised on malformed CDL input; carries the byte offset of the error."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.message = message
        self.offset = offset


@dataclass(frozen=True)
class Predicate:
    head: str
    args: tuple

    def __repr__(self):
        return f"Predicate({self.head}, {list(self.args)})"


@dataclass(frozen=True)
class Entity:
    points: tuple  # ordered single-uppercase-letter point labels

    def __repr__(self):
        return f"Entity({''.join(self.points)})"


@dataclass(frozen=True)
class Number:
    value: Fraction

    def __repr__(self):
        return f"Number({self.value})"


@dataclass(frozen=True)
class Variable:
    name: str

    def __repr__(self):
        return f"Variable({self.name})"


Term = Union[Predicate, Entity, Number, Variable]


def parse_term(text: str) -> Term:
    """Parse a single CDL expression into a Term AST.

    Numbers become exact rationals (decimals via power-of-ten denominators,
    "p/q" via Fraction). Raises CdlSyntaxError with a byte offset on
    unbalanced parentheses, unknown characters, or empty arguments.
    """
    return _parse(text, pattern=False)


def parse_pattern_term(text: str) -> Term:
    """Parse a theorem-pattern expression.

    Same grammar as parse_term except that runs of lowercase letters denote
    entities over pattern point variables ("abc" -> Entity(a, b, c)).
    """
    return _parse(text, pattern=True)


def _parse(text: str, pattern: bool) -> Term:
    parser = _Parser(text, pattern=pattern)
    term = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(parser.text):
        raise CdlSyntaxError("trailing input", parser.pos)
    return term


def render_term(t: Term) -> str:
    """Canonical textual form with no whitespace; inverse of parse_term."""
    if isinstance(t, Predicate):
        return f"{t.head}({','.join(render_term(a) for a in t.args)})"
    if isinstance(t, Entity):
        return "".join(t.points)
    if isinstance(t, Number):
        v = t.value
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(t, Variable):
        return t.name
    raise TypeError(f"not a Term: {t!r}")


class _Parser:
    def __init__(self, text: str, pattern: bool = False):
        self.text = text
        self.pos = 0
        self.pattern = pattern

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n\r":
            self.pos += 1

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_expr(self) -> Term:
        self.skip_ws()
        c = self.peek()
        if not c:
            raise CdlSyntaxError("empty expression", self.pos)
        if c.isdigit() or c == "-" or c == ".":
            return self.parse_number()
        if c.isupper():
            return self.parse_name_or_entity()
        if c.islower():
            start = self.pos
            if self.pattern:
                while self.peek().islower():
                    self.pos += 1
                return Entity(tuple(self.text[start:self.pos]))
            self.pos += 1
            nxt = self.peek()
            if nxt and (nxt.isalnum() or nxt == "_"):
                raise CdlSyntaxError("variables are single lowercase letters", start)
            return Variable(self.text[start])
        raise CdlSyntaxError(f"unexpected character {c!r}", self.pos)

    def parse_number(self) -> Term:
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        digits = False
        while self.peek().isdigit():
            digits = True
            self.pos += 1
        if self.peek() == ".":
            self.pos += 1
            while self.peek().isdigit():
                digits = True
                self.pos += 1
        if not digits:
            raise CdlSyntaxError("malformed number", start)
        if self.peek() == "/":
            self.pos += 1
            dstart = self.pos
            while self.peek().isdigit():
                self.pos += 1
            if self.pos == dstart:
                raise CdlSyntaxError("malformed fraction denominator", dstart)
        try:
            value = Fraction(self.text[start:self.pos])
        except (ValueError, ZeroDivisionError):
            raise CdlSyntaxError("malformed number", start) from None
        return Number(value)

    def parse_name_or_entity(self) -> Term:
        start = self.pos
        while self.peek().isalpha() or self.peek() == "_":
            self.pos += 1
        token = self.text[start:self.pos]
        self.skip_ws()
        if self.peek() == "(":
            if not (token[0].isupper() and token.isalnum()):
                raise CdlSyntaxError(f"bad predicate name {token!r}", start)
            self.pos += 1  # consume "("
            args = []
            self.skip_ws()
            if self.peek() == ")":
                raise CdlSyntaxError("empty argument list", self.pos)
            while True:
                args.append(self.parse_expr())
                self.skip_ws()
                c = self.peek()
                if c == ",":
                    self.pos += 1
                    self.skip_ws()
                    if self.peek() == ")":
                        raise CdlSyntaxError("empty argument", self.pos)
                    continue
                if c == ")":
                    self.pos += 1
                    return Predicate(token, tuple(args))
                raise CdlSyntaxError("unbalanced parentheses", self.pos)
        # bare token: all-uppercase entity like "AD"
        if all(ch.isupper() for ch in token):
            return Entity(tuple(token))
        raise CdlSyntaxError(f"unknown token {token!r}", start)
