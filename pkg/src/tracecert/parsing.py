"""Text form of noncommutative polynomials.

Grammar (whitespace insignificant)::

    poly   := ['+'|'-'] term (('+'|'-') term)*
    term   := coeff | [coeff '*'?] factor ('*'? factor)*
    factor := (var | '(' poly ')' | 'adj(' poly ')') ('^' uint)*
    var    := 'X' uint | 'X' | 'Y' | 'Z'        (X, Y, Z alias X1, X2, X3)
    coeff  := int ['/' uint]
"""

from __future__ import annotations

from fractions import Fraction
from itertools import groupby

from .ncpoly import NcPoly, Word

ALIASES = {"X": 1, "Y": 2, "Z": 3}


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.pos = 0
        self.n = n

    def error(self, message: str):
        raise ParseError(message, self.pos, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, token: str) -> bool:
        self.skip()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def uint(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an unsigned integer")
        return int(self.text[start:self.pos])

    def starts_factor(self) -> bool:
        c = self.peek()
        return c in ALIASES or c == "(" or self.text.startswith("adj(", self.pos)

    def poly(self) -> NcPoly:
        sign = 1
        if self.eat("-"):
            sign = -1
        else:
            self.eat("+")
        total = self.term() * sign
        while True:
            if self.eat("+"):
                total = total + self.term()
            elif self.eat("-"):
                total = total - self.term()
            else:
                return total

    def term(self) -> NcPoly:
        coeff = None
        if self.peek().isdigit():
            num = self.uint()
            den = 1
            if self.eat("/"):
                den = self.uint()
                if den == 0:
                    self.error("zero denominator")
            coeff = Fraction(num, den)
            if not self.eat("*") and not self.starts_factor():
                return NcPoly.constant(self.n, coeff)
        if not self.starts_factor():
            self.error("expected a variable, '(' or 'adj('")
        result = self.factor()
        while True:
            if self.eat("*"):
                if not self.starts_factor():
                    self.error("expected a factor after '*'")
                result = result * self.factor()
            elif self.starts_factor():
                result = result * self.factor()
            else:
                break
        return result * coeff if coeff is not None else result

    def factor(self) -> NcPoly:
        self.skip()
        if self.eat("adj("):
            inner = self.poly()
            if not self.eat(")"):
                self.error("expected ')'")
            base = inner.adj()
        elif self.eat("("):
            base = self.poly()
            if not self.eat(")"):
                self.error("expected ')'")
        else:
            base = self.var()
        while self.eat("^"):
            base = base ** self.uint()
        return base

    def var(self) -> NcPoly:
        start = self.pos
        letter = self.text[self.pos]
        self.pos += 1
        if letter == "X" and self.pos < len(self.text) and self.text[self.pos].isdigit():
            index = self.uint()
        else:
            index = ALIASES[letter]
        if not 1 <= index <= self.n:
            raise ParseError(f"variable index {index} outside 1..{self.n}", start, self.text)
        return NcPoly.var(index, self.n)


def _infer_n(text: str) -> int:
    n = 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "X" and i + 1 < len(text) and text[i + 1].isdigit():
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            n = max(n, int(text[i + 1:j]))
            i = j
            continue
        if c in ALIASES:
            n = max(n, ALIASES[c])
        i += 1
    return n


def parse(text: str, n: int | None = None) -> NcPoly:
    """Parse ``text`` into a polynomial in ``n`` variables.

    When ``n`` is omitted it is the largest variable index mentioned."""
    if n is None:
        n = _infer_n(text)
    p = _Parser(text, n)
    if not p.peek():
        p.error("empty polynomial")
    result = p.poly()
    if p.peek():
        p.error(f"unexpected {p.peek()!r}")
    return result


def format_word(w: Word) -> str:
    if not w:
        return "1"
    parts = []
    for letter, run in groupby(w):
        k = len(list(run))
        parts.append(f"X{letter}" if k == 1 else f"X{letter}^{k}")
    return "*".join(parts)


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(f: NcPoly) -> str:
    """Inverse of :func:`parse`, words in graded lexicographic order."""
    if f.is_zero():
        return "0"
    out = []
    for idx, (w, c) in enumerate(f.terms()):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not w:
            body = _format_coeff(a)
        elif a == 1:
            body = format_word(w)
        else:
            body = f"{_format_coeff(a)}*{format_word(w)}"
        if idx == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)
