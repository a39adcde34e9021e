"""Polynomials in commuting variables with rational coefficients."""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

Exponents = tuple[int, ...]


def monomials_up_to(n: int, d: int) -> list[Exponents]:
    """Exponent vectors of total degree at most ``d``, graded then reverse
    lexicographic in the exponents (so ``x1`` precedes ``x2``)."""
    out = []
    for total in range(d + 1):
        block = [e for e in itertools.product(range(total + 1), repeat=n) if sum(e) == total]
        out.extend(sorted(block, reverse=True))
    return out


class CommPoly:
    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[Exponents, object] | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[Exponents, Fraction] = defaultdict(Fraction)
        for e, c in items:
            e = tuple(e)
            if len(e) != n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e} for {n} variables")
            acc[e] += Fraction(c)
        self.n = n
        self._coeffs = MappingProxyType({e: c for e, c in acc.items() if c != 0})

    @classmethod
    def constant(cls, n: int, c=1) -> "CommPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, i: int, n: int) -> "CommPoly":
        e = [0] * n
        e[i - 1] = 1
        return cls(n, {tuple(e): 1})

    @property
    def coeffs(self) -> Mapping[Exponents, Fraction]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._coeffs), default=-1)

    def coeff(self, e: Exponents) -> Fraction:
        return self._coeffs.get(tuple(e), Fraction(0))

    def is_zero(self) -> bool:
        return not self._coeffs

    def _coerce(self, other):
        if isinstance(other, CommPoly):
            if other.n != self.n:
                raise ValueError("variable counts differ")
            return other
        if isinstance(other, (int, Fraction)):
            return CommPoly.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._coeffs)
        for e, c in other._coeffs.items():
            acc[e] = acc.get(e, 0) + c
        return CommPoly(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return CommPoly(self.n, {e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CommPoly(self.n, {e: c * other for e, c in self._coeffs.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Exponents, Fraction] = defaultdict(Fraction)
        for e1, a in self._coeffs.items():
            for e2, b in other._coeffs.items():
                acc[tuple(x + y for x, y in zip(e1, e2))] += a * b
        return CommPoly(self.n, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = CommPoly.constant(self.n, 1)
        for _ in range(k):
            result = result * self
        return result

    def __call__(self, *point):
        total = 0
        for e, c in self._coeffs.items():
            term = c
            for x, k in zip(point, e):
                term = term * x**k
            total = total + term
        return total

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CommPoly.constant(self.n, other)
        if not isinstance(other, CommPoly):
            return NotImplemented
        return self.n == other.n and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash((self.n, frozenset(self._coeffs.items())))

    def __str__(self) -> str:
        from .ncpoly import cyclic_sort_section
        from .parsing import format_poly

        return format_poly(cyclic_sort_section(self))

    def __repr__(self) -> str:
        return f"CommPoly({self.n}, {str(self)!r})"
