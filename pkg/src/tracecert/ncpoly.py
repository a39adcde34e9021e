"""Exact polynomials in noncommuting self-adjoint variables.

Words are tuples of 1-based variable indices, the empty tuple being the unit
word.  Coefficients are :class:`fractions.Fraction`.  The involution fixes each
variable and reverses words, so on rational coefficients it is plain word
reversal.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

Word = tuple[int, ...]
MultiDegree = tuple[int, ...]
Scalar = Union[int, Fraction]


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("float coefficients are not exact; pass a Fraction")
    return Fraction(c)


def word_key(w: Word) -> tuple[int, Word]:
    """Sort key for graded lexicographic order."""
    return (len(w), w)


def words_up_to(n: int, k: int) -> list[Word]:
    """All words over ``n`` letters of length at most ``k``, graded-lex."""
    out: list[Word] = []
    for length in range(k + 1):
        out.extend(itertools.product(range(1, n + 1), repeat=length))
    return out


def count_words(n: int, k: int) -> int:
    return sum(n**j for j in range(k + 1))


@dataclass(frozen=True, order=True)
class CyclicClass:
    """A rotation class of words, identified by its least rotation."""

    representative: Word

    def __len__(self) -> int:
        return len(self.representative)


def least_rotation(w: Word) -> Word:
    if len(w) < 2:
        return tuple(w)
    return min(tuple(w[i:]) + tuple(w[:i]) for i in range(len(w)))


def cyclic_canonical(w: Word) -> CyclicClass:
    return CyclicClass(least_rotation(tuple(w)))


class NcPoly:
    """Immutable polynomial in ``n`` noncommuting variables with rational
    coefficients.  Zero coefficients are never stored, so ``==`` is
    structural."""

    __slots__ = ("n", "_coeffs", "_hash")

    def __init__(self, n: int, coeffs: Mapping[Word, Scalar] | Iterable[tuple[Word, Scalar]] = ()):
        if n < 0:
            raise ValueError("variable count must be nonnegative")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for w, c in items:
            w = tuple(w)
            for letter in w:
                if not 1 <= letter <= n:
                    raise ValueError(f"variable index {letter} outside 1..{n}")
            acc[w] += _as_fraction(c)
        self.n = n
        self._coeffs = MappingProxyType({w: c for w, c in acc.items() if c != 0})
        self._hash = None

    # constructors

    @classmethod
    def _raw(cls, n: int, coeffs: dict[Word, Fraction]) -> "NcPoly":
        obj = cls.__new__(cls)
        obj.n = n
        obj._coeffs = MappingProxyType({w: c for w, c in coeffs.items() if c != 0})
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, n: int) -> "NcPoly":
        return cls._raw(n, {})

    @classmethod
    def constant(cls, n: int, c: Scalar = 1) -> "NcPoly":
        return cls._raw(n, {(): _as_fraction(c)})

    @classmethod
    def var(cls, i: int, n: int) -> "NcPoly":
        if not 1 <= i <= n:
            raise ValueError(f"variable index {i} outside 1..{n}")
        return cls._raw(n, {(i,): Fraction(1)})

    @classmethod
    def word(cls, w: Iterable[int], n: int, c: Scalar = 1) -> "NcPoly":
        return cls(n, {tuple(w): c})

    # accessors

    @property
    def coeffs(self) -> Mapping[Word, Fraction]:
        return self._coeffs

    def coeff(self, w: Word) -> Fraction:
        return self._coeffs.get(tuple(w), Fraction(0))

    def terms(self) -> list[tuple[Word, Fraction]]:
        """Terms in graded lexicographic word order."""
        return sorted(self._coeffs.items(), key=lambda t: word_key(t[0]))

    def support(self) -> list[Word]:
        return sorted(self._coeffs, key=word_key)

    @property
    def degree(self) -> int:
        """Largest word length in the support; -1 for the zero polynomial."""
        return max((len(w) for w in self._coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_symmetric(self) -> bool:
        return self == self.adj()

    def l1_norm(self) -> Fraction:
        return sum((abs(c) for c in self._coeffs.values()), Fraction(0))

    def with_n(self, n: int) -> "NcPoly":
        """The same polynomial viewed in ``n`` variables."""
        if n < self.n and any(max(w, default=0) > n for w in self._coeffs):
            raise ValueError("polynomial uses a variable beyond the new count")
        return NcPoly._raw(n, dict(self._coeffs))

    # arithmetic

    def _coerce(self, other) -> "NcPoly":
        if isinstance(other, NcPoly):
            if other.n != self.n:
                raise ValueError(f"variable counts differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return NcPoly.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._coeffs)
        for w, c in other._coeffs.items():
            acc[w] = acc.get(w, 0) + c
        return NcPoly._raw(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return NcPoly._raw(self.n, {w: -c for w, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            return NcPoly._raw(self.n, {w: a * c for w, a in self._coeffs.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for u, a in self._coeffs.items():
            for v, b in other._coeffs.items():
                acc[u + v] += a * b
        return NcPoly._raw(self.n, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _as_fraction(other))
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        result = NcPoly.constant(self.n, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def adj(self) -> "NcPoly":
        return NcPoly._raw(self.n, {w[::-1]: c for w, c in self._coeffs.items()})

    def substitute(self, images: Mapping[int, "NcPoly"], n: int | None = None) -> "NcPoly":
        """Replace variable ``i`` by ``images[i]``; unmapped variables stay.

        The result lives in ``n`` variables (default: that of the images)."""
        if n is None:
            n = next(iter(images.values())).n if images else self.n
        cache: dict[int, NcPoly] = {}

        def image(i: int) -> NcPoly:
            if i not in cache:
                cache[i] = images[i] if i in images else NcPoly.var(i, n)
            return cache[i]

        total = NcPoly.zero(n)
        for w, c in self._coeffs.items():
            term = NcPoly.constant(n, c)
            for letter in w:
                term = term * image(letter)
            total = total + term
        return total

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = NcPoly.constant(self.n, other)
        if not isinstance(other, NcPoly):
            return NotImplemented
        return self.n == other.n and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._coeffs.items())))
        return self._hash

    def __iter__(self) -> Iterator[tuple[Word, Fraction]]:
        return iter(self.terms())

    def __repr__(self) -> str:
        from .parsing import format_poly

        return f"NcPoly({self.n}, {format_poly(self)!r})"

    def __str__(self) -> str:
        from .parsing import format_poly

        return format_poly(self)


def adj(f: NcPoly) -> NcPoly:
    return f.adj()


involution = adj


def commutator(p: NcPoly, q: NcPoly) -> NcPoly:
    return p * q - q * p


# cyclic equivalence


def cyclic_classes(f: NcPoly) -> dict[Word, Fraction]:
    """Summed coefficient per rotation class, keyed by the least rotation.
    Classes summing to zero are dropped."""
    acc: dict[Word, Fraction] = defaultdict(Fraction)
    for w, c in f.coeffs.items():
        acc[least_rotation(w)] += c
    return {w: c for w, c in acc.items() if c != 0}


def cyc_equiv(f: NcPoly, g: NcPoly) -> bool:
    if f.n != g.n:
        raise ValueError("variable counts differ")
    return not cyclic_classes(f - g)


class NotCyclicallyZero(ValueError):
    """Raised when a polynomial is not a sum of commutators.

    ``residue`` maps each offending class representative to its summed
    coefficient."""

    def __init__(self, residue: dict[Word, Fraction]):
        self.residue = residue
        super().__init__(f"not cyclically equivalent to 0; residue on {len(residue)} class(es)")


def commutator_decomposition(f: NcPoly) -> list[tuple[NcPoly, NcPoly]]:
    """Pairs ``(p, q)`` with ``f == sum(p*q - q*p)`` exactly.

    Each word ``w = v1 v2`` whose least rotation is ``v2 v1`` contributes one
    commutator ``c*(w - v2 v1) = [v2, -c*v1]``.
    """
    residue = cyclic_classes(f)
    if residue:
        raise NotCyclicallyZero(residue)
    n = f.n
    pairs = []
    for w, c in f.terms():
        rep = least_rotation(w)
        if rep == w:
            continue
        for cut in range(1, len(w)):
            if w[cut:] + w[:cut] == rep:
                break
        v1, v2 = w[:cut], w[cut:]
        pairs.append((NcPoly._raw(n, {v2: Fraction(1)}), NcPoly._raw(n, {v1: -c})))
    return pairs


# multihomogeneous structure


def multidegree(w: Word, n: int) -> MultiDegree:
    counts = [0] * n
    for letter in w:
        counts[letter - 1] += 1
    return tuple(counts)


def multihomogeneous_parts(f: NcPoly) -> dict[MultiDegree, NcPoly]:
    buckets: dict[MultiDegree, dict[Word, Fraction]] = defaultdict(dict)
    for w, c in f.coeffs.items():
        buckets[multidegree(w, f.n)][w] = c
    return {d: NcPoly._raw(f.n, b) for d, b in sorted(buckets.items())}


def polarize_step(f: NcPoly, i: int, k: int) -> NcPoly:
    """Split the occurrences of ``X_i`` between ``X_i`` and a fresh variable.

    The fresh variable gets index ``n + 1``.  Each monomial yields the
    ``2**k - 2`` monomials obtained by renaming a nonempty proper subset of its
    ``X_i`` occurrences, which equals ``f(X_i + X') - f(X_i) - f(X')``.
    """
    if k < 2:
        raise ValueError("polarization needs degree k >= 2 in the variable")
    if not 1 <= i <= f.n:
        raise ValueError(f"variable index {i} outside 1..{f.n}")
    fresh = f.n + 1
    acc: dict[Word, Fraction] = defaultdict(Fraction)
    for w, c in f.coeffs.items():
        positions = [j for j, letter in enumerate(w) if letter == i]
        if len(positions) != k:
            raise ValueError(f"word {w} has degree {len(positions)} in X{i}, expected {k}")
        for mask in range(1, 2**k - 1):
            new = list(w)
            for bit, j in enumerate(positions):
                if mask >> bit & 1:
                    new[j] = fresh
            acc[tuple(new)] += c
    return NcPoly._raw(fresh, acc)


def resubstitute(g: NcPoly, i: int, k: int) -> NcPoly:
    """Inverse of :func:`polarize_step`: send the last variable back to
    ``X_i`` and divide by ``2**k - 2``."""
    if k < 2:
        raise ValueError("resubstitution needs k >= 2")
    fresh = g.n
    n = g.n - 1
    acc: dict[Word, Fraction] = defaultdict(Fraction)
    scale = Fraction(1, 2**k - 2)
    for w, c in g.coeffs.items():
        acc[tuple(i if letter == fresh else letter for letter in w)] += c * scale
    return NcPoly._raw(n, acc)


def hermitian_cyclic_part(f: NcPoly) -> NcPoly:
    return (f + f.adj()) * Fraction(1, 2)


# the two-variable bridge to commuting variables


def commutative_project(f: NcPoly):
    """Let the variables commute."""
    from .commutative import CommPoly

    acc: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    for w, c in f.coeffs.items():
        acc[multidegree(w, f.n)] += c
    return CommPoly(f.n, acc)


def cyclic_sort_section(g) -> NcPoly:
    """The unique combination of sorted words ``X1^a1 X2^a2 ...`` whose
    commutative image is ``g``."""
    acc = {}
    for exps, c in g.coeffs.items():
        acc[tuple(itertools.chain.from_iterable([v + 1] * e for v, e in enumerate(exps)))] = c
    return NcPoly._raw(g.n, acc)


def is_sorted_word(w: Word) -> bool:
    return all(a <= b for a, b in zip(w, w[1:]))


def is_cyclically_sorted(f: NcPoly) -> bool:
    """True when every word is a rotation of some ``X^i Y^j``."""
    if f.n != 2:
        raise ValueError("cyclic sortedness is defined for two variables")
    return all(is_sorted_word(least_rotation(w)) for w in f.coeffs)
