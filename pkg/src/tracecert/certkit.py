"""Certificates of membership in the quadratic module generated by the cube
constraints ``1 - X_i^2``, up to cyclic equivalence, and exact builders for
the standard identities.

A :class:`Certificate` claims the polynomial identity::

    target + epsilon == sum(lam * adj(g) * p_gen * g) + sum(p*q - q*p)

with ``p_0 = 1`` and ``p_i = 1 - X_i^2``.  :func:`verify` checks it over the
rationals.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .commutative import CommPoly
from .ncpoly import (
    NcPoly,
    Word,
    commutative_project,
    commutator_decomposition,
    cyclic_sort_section,
    is_cyclically_sorted,
    word_key,
)
from .parsing import format_poly, format_word, parse


@dataclass(frozen=True)
class Term:
    """``lam * adj(g) * p_gen * g``."""

    gen: int
    g: NcPoly
    lam: Fraction = Fraction(1)


@dataclass(frozen=True)
class Certificate:
    target: NcPoly
    epsilon: Fraction
    terms: tuple[Term, ...] = ()
    commutators: tuple[tuple[NcPoly, NcPoly], ...] = ()

    @property
    def n(self) -> int:
        return self.target.n

    @property
    def level(self) -> int:
        """Smallest ``k`` with every term inside the level-``k`` truncated
        module: ``deg g <= k`` for squares, ``deg g <= k - 1`` otherwise."""
        level = 0
        for t in self.terms:
            if t.g.is_zero():
                continue
            level = max(level, t.g.degree + (1 if t.gen else 0))
        return level

    def module_part(self) -> NcPoly:
        """The expanded sum of weighted terms."""
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for t in self.terms:
            _sandwich_into(acc, t.g, t.gen, t.lam)
        return NcPoly(self.n, acc)

    def commutator_part(self) -> NcPoly:
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for p, q in self.commutators:
            for u, a in p.coeffs.items():
                for v, b in q.coeffs.items():
                    acc[u + v] += a * b
                    acc[v + u] -= a * b
        return NcPoly(self.n, acc)

    def rhs(self) -> NcPoly:
        return self.module_part() + self.commutator_part()

    def terms_by_generator(self) -> dict[int, int]:
        counts: dict[int, int] = defaultdict(int)
        for t in self.terms:
            counts[t.gen] += 1
        return dict(counts)


def _sandwich_into(acc: dict, g: NcPoly, gen: int, lam: Fraction) -> None:
    middles = [((), 1)] if gen == 0 else [((), 1), ((gen, gen), -1)]
    items = list(g.coeffs.items())
    for u, a in items:
        ur = u[::-1]
        for v, b in items:
            c = lam * a * b
            for mid, s in middles:
                acc[ur + mid + v] += s * c


@dataclass
class VerifyReport:
    ok: bool
    mismatches: dict[Word, Fraction] = field(default_factory=dict)
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        lines = list(self.problems)
        for w, delta in sorted(self.mismatches.items(), key=lambda t: word_key(t[0])):
            lines.append(f"word {format_word(w)}: rhs - lhs = {delta}")
        return "\n".join(lines)


def verify(c: Certificate) -> VerifyReport:
    problems = []
    if c.epsilon < 0:
        problems.append(f"negative epsilon {c.epsilon}")
    for idx, t in enumerate(c.terms):
        if not 0 <= t.gen <= c.n:
            problems.append(f"term {idx}: generator {t.gen} outside 0..{c.n}")
        if t.lam <= 0:
            problems.append(f"term {idx}: multiplier {t.lam} is not positive")
        if t.g.n != c.n:
            problems.append(f"term {idx}: polynomial in {t.g.n} variables")
    for idx, (p, q) in enumerate(c.commutators):
        if p.n != c.n or q.n != c.n:
            problems.append(f"commutator {idx}: wrong variable count")
    if problems:
        return VerifyReport(False, {}, problems)
    diff = c.rhs() - (c.target + c.epsilon)
    return VerifyReport(diff.is_zero(), dict(diff.coeffs), [])


def close_with_commutators(target: NcPoly, epsilon, terms: Sequence[Term]) -> Certificate:
    """Complete ``terms`` into a certificate by recording the commutators
    that carry their sum to ``target + epsilon``.

    Raises :class:`~tracecert.ncpoly.NotCyclicallyZero` when the terms are
    not cyclically equivalent to ``target + epsilon``."""
    epsilon = Fraction(epsilon)
    partial = Certificate(target, epsilon, tuple(terms))
    gap = target + epsilon - partial.module_part()
    return Certificate(target, epsilon, tuple(terms), tuple(commutator_decomposition(gap)))


# builders


def _x(i: int, n: int) -> NcPoly:
    return NcPoly.var(i, n)


def telescope_power(i: int, m: int, n: int | None = None) -> Certificate:
    """``1 - X_i^(2m) = sum_{k<m} X_i^k (1 - X_i^2) X_i^k``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    n = n or i
    target = 1 - NcPoly.word((i,) * (2 * m), n)
    terms = tuple(Term(i, NcPoly.word((i,) * k, n)) for k in range(m))
    return Certificate(target, Fraction(0), terms)


def remark37(i: int, m: int, n: int | None = None) -> Certificate:
    """``1 - a + a^m/m - 1/m`` with ``a = X_i^2`` as weighted hermitian
    squares of ``X_i^k (1 - X_i^2)``."""
    if m < 2:
        raise ValueError("m must be at least 2")
    n = n or i
    xi2 = NcPoly.word((i, i), n)
    target = 1 - xi2 + NcPoly.word((i,) * (2 * m), n) * Fraction(1, m) - Fraction(1, m)
    one_minus = 1 - xi2
    terms = tuple(
        Term(0, NcPoly.word((i,) * k, n) * one_minus, Fraction(m - 1 - k, m))
        for k in range(m - 1)
    )
    return Certificate(target, Fraction(0), terms)


def example42(m: int) -> Certificate:
    """Certificate for ``(1 - X^2)(1 - Y^2) + 1/m`` at level ``m + 1``."""
    if not isinstance(m, int) or isinstance(m, bool):
        raise TypeError("m must be an integer; epsilon = 0 is not certifiable")
    if m < 2:
        raise ValueError("m must be at least 2")
    n = 2
    X, Y = _x(1, n), _x(2, n)
    target = (1 - X * X) * (1 - Y * Y)
    lam = Fraction(1, m)
    xm = X**m
    terms = [Term(2, NcPoly.constant(n, 1), lam)]
    terms += [
        Term(2, X**k * (1 - X * X), Fraction(m - 1 - k, m)) for k in range(m - 1)
    ]
    terms.append(Term(0, Y * xm, lam))
    terms += [Term(1, X**k, lam) for k in range(m)]
    return close_with_commutators(target, lam, terms)


def motzkin_polynomial() -> NcPoly:
    return parse("Y*X^4*Y + X*Y^4*X - 3*X*Y^2*X + 1", 2)


def motzkin_decomposition(epsilon=Fraction(1, 4)) -> Certificate:
    """Certificate for the cyclically sorted Motzkin-type polynomial plus
    ``epsilon`` built from two hermitian squares and :func:`example42`."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = 2
    X, Y = _x(1, n), _x(2, n)
    m = max(2, math.ceil(1 / epsilon))
    base = example42(m)
    terms = [Term(0, (1 - X * X) * Y), Term(0, (1 - Y * Y) * X)]
    terms += base.terms
    slack = epsilon - Fraction(1, m)
    if slack:
        terms.append(Term(0, NcPoly.constant(n, 1), slack))
    return close_with_commutators(motzkin_polynomial(), epsilon, terms)


def word_bound_certificate(w: Sequence[int], sign: int, n: int | None = None) -> Certificate:
    """Certificate for ``2 - sign*(w + w*)``.

    Uses ``adj(1 - s w)(1 - s w) + (1 - w* w)`` and telescopes ``1 - w* w``
    over the suffixes of ``w``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    w = tuple(w)
    n = n or max(w, default=1)
    word = NcPoly.word(w, n)
    target = 2 - (word + word.adj()) * sign
    terms = []
    square = 1 - word * sign
    if not square.is_zero():
        terms.append(Term(0, square))
    for j, letter in enumerate(w):
        terms.append(Term(letter, NcPoly.word(w[j + 1:], n)))
    return Certificate(target, Fraction(0), tuple(terms))


def word_bound_level(k: int, n: int = 2) -> int:
    """Largest certificate level among word bounds for words of length
    ``<= 2k`` (the concrete level at which all of them hold)."""
    return word_bound_certificate((1,) * (2 * k), 1, n).level


# commutative certificates and the sorted lift


@dataclass(frozen=True)
class CommutativeCertificate:
    """``target + epsilon == sum lam p^2 + sum lam q^2 (1-x^2) + sum lam r^2 (1-y^2)``
    with entries stored as ``(lam, poly)`` pairs."""

    target: CommPoly
    epsilon: Fraction
    squares: tuple[tuple[Fraction, CommPoly], ...] = ()
    x_terms: tuple[tuple[Fraction, CommPoly], ...] = ()
    y_terms: tuple[tuple[Fraction, CommPoly], ...] = ()

    def rhs(self) -> CommPoly:
        n = self.target.n
        one = CommPoly.constant(n, 1)
        x, y = CommPoly.var(1, n), CommPoly.var(2, n)
        total = CommPoly(n)
        for lam, p in self.squares:
            total = total + p * p * lam
        for lam, q in self.x_terms:
            total = total + q * q * (one - x * x) * lam
        for lam, r in self.y_terms:
            total = total + r * r * (one - y * y) * lam
        return total

    @property
    def degree(self) -> int:
        d = 0
        for group, extra in ((self.squares, 0), (self.x_terms, 1), (self.y_terms, 1)):
            for _, p in group:
                d = max(d, p.degree + extra)
        return d


def verify_commutative(cc: CommutativeCertificate) -> bool:
    if cc.epsilon < 0:
        return False
    if any(lam <= 0 for group in (cc.squares, cc.x_terms, cc.y_terms) for lam, _ in group):
        return False
    return cc.rhs() == cc.target + cc.epsilon


def putinar_lift(cc: CommutativeCertificate, target: NcPoly | None = None) -> Certificate:
    """Lift a commutative certificate to a noncommutative one through the
    sorted-word section; both sides are cyclically sorted with equal
    commutative images, hence cyclically equivalent."""
    if cc.target.n != 2:
        raise ValueError("the sorted lift is for two variables")
    if target is None:
        target = cyclic_sort_section(cc.target)
    if not is_cyclically_sorted(target):
        raise ValueError("target is not cyclically sorted")
    if commutative_project(target) != cc.target:
        raise ValueError("commutative image of the target differs from the certificate target")
    terms = [Term(0, cyclic_sort_section(p), lam) for lam, p in cc.squares]
    terms += [Term(1, cyclic_sort_section(q), lam) for lam, q in cc.x_terms]
    terms += [Term(2, cyclic_sort_section(r).adj(), lam) for lam, r in cc.y_terms]
    return close_with_commutators(target, cc.epsilon, terms)


# complex certificates


@dataclass(frozen=True)
class ComplexTerm:
    """``lam * adj(p + i q) * p_gen * (p + i q)``."""

    gen: int
    p: NcPoly
    q: NcPoly
    lam: Fraction = Fraction(1)


@dataclass(frozen=True)
class ComplexCertificate:
    """Certificate over the Gaussian extension; the target is ``target +
    i * target_imag`` and each commutator is ``[a + i b, c + i d]`` stored as
    ``((a, b), (c, d))``."""

    target: NcPoly
    epsilon: Fraction
    terms: tuple[ComplexTerm, ...] = ()
    commutators: tuple[tuple[tuple[NcPoly, NcPoly], tuple[NcPoly, NcPoly]], ...] = ()
    target_imag: NcPoly | None = None

    def rhs(self) -> tuple[NcPoly, NcPoly]:
        n = self.target.n
        re: dict[Word, Fraction] = defaultdict(Fraction)
        im = NcPoly.zero(n)
        for t in self.terms:
            _sandwich_into(re, t.p, t.gen, t.lam)
            _sandwich_into(re, t.q, t.gen, t.lam)
            gen = _generator(t.gen, n)
            im = im + (t.p.adj() * gen * t.q - t.q.adj() * gen * t.p) * t.lam
        real = NcPoly(n, re)
        for (a, b), (c, d) in self.commutators:
            real = real + a * c - c * a - (b * d - d * b)
            im = im + a * d - d * a + b * c - c * b
        return real, im


def _generator(i: int, n: int) -> NcPoly:
    return NcPoly.constant(n, 1) if i == 0 else 1 - NcPoly.word((i, i), n)


def verify_complex(c: ComplexCertificate) -> bool:
    if c.epsilon < 0 or any(t.lam <= 0 for t in c.terms):
        return False
    real, im = c.rhs()
    imag_target = c.target_imag if c.target_imag is not None else NcPoly.zero(c.target.n)
    return real == c.target + c.epsilon and im == imag_target


def complex_to_real(c: ComplexCertificate) -> Certificate:
    """Real certificate from a complex one with real target: keep real
    parts, since ``adj(p+iq) P (p+iq)`` has real part ``p*Pp + q*Pq``."""
    if c.target_imag is not None and not c.target_imag.is_zero():
        raise ValueError("target has a nonzero imaginary part")
    terms = []
    for t in c.terms:
        for g in (t.p, t.q):
            if not g.is_zero():
                terms.append(Term(t.gen, g, t.lam))
    commutators = []
    for (a, b), (cc, d) in c.commutators:
        commutators.append((a, cc))
        commutators.append((-b, d))
    return Certificate(c.target, c.epsilon, tuple(terms), tuple(commutators))


# JSON interchange


def _frac(s) -> Fraction:
    return Fraction(str(s))


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def certificate_to_dict(c: Certificate) -> dict:
    return {
        "n": c.n,
        "target": format_poly(c.target),
        "epsilon": _frac_str(c.epsilon),
        "terms": [{"gen": t.gen, "lambda": _frac_str(t.lam), "g": format_poly(t.g)} for t in c.terms],
        "commutators": [{"p": format_poly(p), "q": format_poly(q)} for p, q in c.commutators],
    }


def certificate_from_dict(d: dict) -> Certificate:
    n = int(d["n"])
    return Certificate(
        parse(d["target"], n),
        _frac(d["epsilon"]),
        tuple(Term(int(t["gen"]), parse(t["g"], n), _frac(t.get("lambda", "1"))) for t in d.get("terms", [])),
        tuple((parse(x["p"], n), parse(x["q"], n)) for x in d.get("commutators", [])),
    )


def certificate_to_json(c: Certificate, indent: int | None = 2) -> str:
    return json.dumps(certificate_to_dict(c), indent=indent)


def certificate_from_json(text: str) -> Certificate:
    return certificate_from_dict(json.loads(text))


def _comm_pairs(pairs: Iterable[tuple[Fraction, CommPoly]]) -> list[dict]:
    return [{"lambda": _frac_str(lam), "poly": format_poly(cyclic_sort_section(p))} for lam, p in pairs]


def commutative_certificate_to_dict(cc: CommutativeCertificate) -> dict:
    return {
        "n": cc.target.n,
        "target": format_poly(cyclic_sort_section(cc.target)),
        "epsilon": _frac_str(cc.epsilon),
        "squares": _comm_pairs(cc.squares),
        "x_terms": _comm_pairs(cc.x_terms),
        "y_terms": _comm_pairs(cc.y_terms),
    }


def commutative_certificate_from_dict(d: dict) -> CommutativeCertificate:
    n = int(d.get("n", 2))

    def cp(text: str) -> CommPoly:
        return commutative_project(parse(text, n))

    def pairs(key: str):
        return tuple((_frac(e.get("lambda", "1")), cp(e["poly"])) for e in d.get(key, []))

    return CommutativeCertificate(cp(d["target"]), _frac(d["epsilon"]),
                                  pairs("squares"), pairs("x_terms"), pairs("y_terms"))
