from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from tracecert.commutative import CommPoly
from tracecert.ncpoly import NcPoly


def random_word(rng: np.random.Generator, n: int, max_len: int) -> tuple[int, ...]:
    length = int(rng.integers(0, max_len + 1))
    return tuple(int(x) for x in rng.integers(1, n + 1, size=length))


def random_poly(rng: np.random.Generator, n: int, degree: int, terms: int = 5) -> NcPoly:
    coeffs = {}
    for _ in range(terms):
        w = random_word(rng, n, degree)
        coeffs[w] = coeffs.get(w, 0) + Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
    return NcPoly(n, coeffs)


def random_symmetric(rng: np.random.Generator, n: int, degree: int, terms: int = 5) -> NcPoly:
    f = random_poly(rng, n, degree, terms)
    return f + f.adj()


def random_comm(rng: np.random.Generator, n: int, degree: int, terms: int = 5) -> CommPoly:
    coeffs = {}
    for _ in range(terms):
        total = int(rng.integers(0, degree + 1))
        cuts = np.sort(rng.integers(0, total + 1, size=n - 1))
        e = tuple(int(x) for x in np.diff(np.concatenate([[0], cuts, [total]])))
        coeffs[e] = coeffs.get(e, 0) + Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
    return CommPoly(n, coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# acceptance bookkeeping: one pass/fail line per criterion at the end of the run

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
