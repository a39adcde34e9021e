"""Exact rounding of numeric Gram blocks into verified certificates."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ..certkit import Certificate, Term, close_with_commutators
from ..ncpoly import NcPoly

Matrix = list[list[Fraction]]


class RoundingFailure(RuntimeError):
    pass


def rationalize(x: float, denominator: int) -> Fraction:
    """Nearest point of the grid ``Z / denominator``.

    A shared denominator keeps the exact factorization small: limit_denominator
    on each entry separately makes the common denominator explode."""
    return Fraction(int(round(float(x) * denominator)), denominator)


def ldl(G: Matrix) -> tuple[Matrix, list[Fraction]]:
    """Exact ``G = L diag(d) L^T`` with unit lower triangular ``L``.

    Raises :class:`RoundingFailure` unless ``G`` is positive semidefinite: a
    zero pivot is accepted only when the rest of its column vanishes."""
    size = len(G)
    L = [[Fraction(0)] * size for _ in range(size)]
    d: list[Fraction] = []
    S = [row[:] for row in G]  # lower triangle holds the running Schur complement
    for j in range(size):
        pivot = S[j][j]
        L[j][j] = Fraction(1)
        col = {i: S[i][j] for i in range(j + 1, size) if S[i][j]}
        if pivot < 0 or (pivot == 0 and col):
            raise RoundingFailure(f"block is not positive semidefinite (pivot {float(pivot):.3e} at {j})")
        d.append(pivot)
        if pivot == 0:
            continue
        for i, c in col.items():
            f = c / pivot
            L[i][j] = f
            row = S[i]
            for m, cm in col.items():
                if m > i:
                    break
                row[m] -= f * cm
    return L, d


def exact_project(problem, x: list[Fraction]) -> list[Fraction]:
    """Move the rational vector onto ``A x = b`` exactly.

    The residual of each row is spread uniformly over the ``G_0`` entries of
    that row; every such entry feeds exactly one row (weight 1 on the
    diagonal, 2 off it), so the rows decouple."""
    A = problem.A.tocsr()
    b = problem.b_exact
    x = list(x)
    first = problem.block_offsets[1] if len(problem.block_offsets) > 1 else len(x)
    indptr, indices, data = A.indptr, A.indices, A.data
    for r in range(A.shape[0]):
        lo, hi = indptr[r], indptr[r + 1]
        total = Fraction(0)
        own = []
        weight = 0
        for pos in range(lo, hi):
            col = indices[pos]
            a = int(round(data[pos]))
            total += a * x[col]
            if col < first:
                own.append(col)
                weight += a
        resid = b[r] - total
        if resid:
            if not own:
                raise RoundingFailure(f"row {r} has no square-block entries to absorb the residual")
            share = resid / weight
            for col in own:
                x[col] += share
    return x


def rounded_blocks(problem, blocks: Sequence[np.ndarray], denominator: int) -> list[Matrix]:
    x = problem.vector_from_blocks(blocks)
    xq = [rationalize(v, denominator) for v in x]
    return problem.exact_blocks_from_vector(exact_project(problem, xq))


def factor_terms(problem, exact_blocks: Sequence[Matrix], make_poly) -> list[tuple[int, Fraction, object]]:
    """``(gen, lam, g)`` triples with ``sum lam * g* p_gen g`` equal to the
    Gram expansion of the blocks."""
    out = []
    for i, (G, basis) in enumerate(zip(exact_blocks, problem.bases)):
        if not basis:
            continue
        L, d = ldl(G)
        for j, dj in enumerate(d):
            if not dj:
                continue
            coeffs = {basis[u]: L[u][j] for u in range(j, len(basis)) if L[u][j]}
            out.append((i, dj, make_poly(coeffs)))
    return out


def round_certificate(problem, blocks: Sequence[np.ndarray], denominator: int = 10**6,
                      max_denominator: int = 10**12) -> Certificate:
    """Rationalize, project exactly, factor exactly, and close the result
    with commutators.  Doubles the denominator bound on failure."""
    n = problem.n
    last: Exception | None = None
    D = denominator
    while D <= max_denominator:
        try:
            exact = rounded_blocks(problem, blocks, D)
            triples = factor_terms(problem, exact, lambda c: NcPoly(n, c))
            terms = [Term(i, g, lam) for i, lam, g in triples]
            return close_with_commutators(problem.f, problem.epsilon, terms)
        except RoundingFailure as exc:
            last = exc
            D *= 2
    raise RoundingFailure(f"rounding failed up to denominator {max_denominator}: {last}")
