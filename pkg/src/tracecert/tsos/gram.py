"""Gram-matrix encoding of membership in the truncated quadratic module
modulo cyclic equivalence."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..commutative import CommPoly, monomials_up_to
from ..ncpoly import NcPoly, Word, cyc_equiv, least_rotation, word_key, words_up_to


def orbit_key(w: Word) -> Word:
    """Representative of the rotation class of ``w`` merged with the class of
    its reverse.  For symmetric data both classes carry equal constraints."""
    return min(least_rotation(w), least_rotation(w[::-1]), key=word_key)


def generator(i: int, n: int) -> NcPoly:
    """``1`` for ``i == 0``, otherwise ``1 - X_i^2``."""
    if i == 0:
        return NcPoly.constant(n, 1)
    return NcPoly.constant(n, 1) - NcPoly.word((i, i), n)


def _gen_words(i: int) -> list[tuple[Word, int]]:
    return [((), 1)] if i == 0 else [((), 1), ((i, i), -1)]


class DegreeTooHigh(ValueError):
    pass


@dataclass
class GramProblem:
    """Affine constraints ``A @ x == b`` on the upper triangles of the Gram
    blocks ``G_0`` (basis: words of length <= k) and ``G_i`` (words of length
    <= k-1, weighted by ``1 - X_i^2``).  Rows are indexed by rotation classes
    merged with their reversals; ``A`` has integer entries."""

    f: NcPoly
    epsilon: Fraction
    k: int
    bases: list[list[Word]]
    rows: list[Word]
    columns: list[tuple[int, int, int]]
    block_offsets: list[int]
    A: sp.csr_matrix
    b_exact: list[Fraction]
    row_index: dict[Word, int] = field(repr=False)
    unit: Word = ()  # row key of the constant monomial

    @property
    def unit_row(self) -> int:
        return self.row_index[self.unit]

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.bases]

    @property
    def b(self) -> np.ndarray:
        return np.array([float(x) for x in self.b_exact])

    @cached_property
    def col_scale(self) -> np.ndarray:
        """``sqrt(2)`` on off-diagonal columns: the scaled vector has the
        Frobenius norm of the blocks."""
        return np.array([1.0 if a == b else np.sqrt(2.0) for _, a, b in self.columns])

    @cached_property
    def A_scaled(self) -> sp.csr_matrix:
        return (self.A @ sp.diags(1.0 / self.col_scale)).tocsr()

    def retarget(self, epsilon: Fraction) -> "GramProblem":
        """Same constraint matrix with the constant shifted to ``epsilon``."""
        b = list(self.b_exact)
        b[self.unit_row] += Fraction(epsilon) - self.epsilon
        return GramProblem(self.f, Fraction(epsilon), self.k, self.bases, self.rows,
                           self.columns, self.block_offsets, self.A, b, self.row_index, self.unit)

    # conversions between the column vector and the blocks

    def blocks_from_vector(self, x, scaled: bool = False) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        if scaled:
            x = x / self.col_scale
        out = []
        for i, size in enumerate(self.block_sizes):
            lo, hi = self.block_offsets[i], self.block_offsets[i + 1]
            G = np.zeros((size, size))
            iu = np.triu_indices(size)
            G[iu] = x[lo:hi]
            out.append(G + np.triu(G, 1).T)
        return out

    def vector_from_blocks(self, blocks, scaled: bool = False) -> np.ndarray:
        parts = [np.asarray(G, dtype=float)[np.triu_indices(G.shape[0])] for G in blocks]
        x = np.concatenate(parts) if parts else np.zeros(0)
        return x * self.col_scale if scaled else x

    def exact_vector_from_blocks(self, blocks) -> list[Fraction]:
        out = []
        for G in blocks:
            size = len(G)
            out.extend(G[a][b] for a in range(size) for b in range(a, size))
        return out

    def exact_blocks_from_vector(self, x) -> list[list[list[Fraction]]]:
        out = []
        for i, size in enumerate(self.block_sizes):
            G = [[Fraction(0)] * size for _ in range(size)]
            pos = self.block_offsets[i]
            for a in range(size):
                for b in range(a, size):
                    G[a][b] = G[b][a] = x[pos]
                    pos += 1
            out.append(G)
        return out

    # dual side

    def localizing_matrices(self, values: np.ndarray) -> list[np.ndarray]:
        """Matrices ``[L(u* p_i v)]`` for the functional with the given
        per-row values."""
        y = self.A.T @ np.asarray(values, dtype=float)
        factor = np.array([1.0 if a == b else 2.0 for _, a, b in self.columns])
        return self.blocks_from_vector(y / factor)

    def functional_value(self, values: np.ndarray, g: NcPoly) -> float:
        total = 0.0
        vals = np.asarray(values, dtype=float)
        for w, c in g.coeffs.items():
            key = orbit_key(w)
            if key not in self.row_index:
                raise KeyError(f"word {w} exceeds the problem degree")
            total += float(c) * vals[self.row_index[key]]
        return total

    def class_vector(self, g: NcPoly) -> list[Fraction]:
        """Orbit sums of ``g``, aligned with the rows."""
        out = [Fraction(0)] * len(self.rows)
        for w, c in g.coeffs.items():
            out[self.row_index[orbit_key(w)]] += c
        return out

    def expansion(self, blocks) -> NcPoly:
        """``sum_i sum_{u,v} G_i[u,v] u* p_i v`` exactly, from rational blocks."""
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for i, (G, basis) in enumerate(zip(blocks, self.bases)):
            gw = _gen_words(i)
            for a, u in enumerate(basis):
                ur = u[::-1]
                for b, v in enumerate(basis):
                    c = G[a][b]
                    if c:
                        for mid, s in gw:
                            acc[ur + mid + v] += s * c
        return NcPoly(self.n, acc)


def build_gram(f: NcPoly, epsilon, k: int) -> GramProblem:
    """Constraints for ``f + epsilon`` to be cyclically equivalent to an
    element of the level-``k`` truncated quadratic module."""
    epsilon = Fraction(epsilon)
    if not cyc_equiv(f, f.adj()):
        raise ValueError("build_gram expects f cyclically equivalent to its adjoint")
    if f.degree > 2 * k:
        raise DegreeTooHigh(f"degree {f.degree} exceeds 2k = {2 * k}")
    if k < 0:
        raise ValueError("level must be nonnegative")
    n = f.n
    bases = [words_up_to(n, k)] + [words_up_to(n, k - 1) if k >= 1 else [] for _ in range(n)]

    row_keys = sorted({orbit_key(w) for w in words_up_to(n, 2 * k)}, key=word_key)
    row_index = {w: r for r, w in enumerate(row_keys)}
    key_cache: dict[Word, int] = {}

    def row_of(w: Word) -> int:
        r = key_cache.get(w)
        if r is None:
            r = key_cache[w] = row_index[orbit_key(w)]
        return r

    rows_i, cols_i, vals = [], [], []
    columns: list[tuple[int, int, int]] = []
    offsets = [0]
    for i, basis in enumerate(bases):
        gw = _gen_words(i)
        for a, u in enumerate(basis):
            ur = u[::-1]
            for b in range(a, len(basis)):
                v = basis[b]
                col = len(columns)
                columns.append((i, a, b))
                factor = 1 if a == b else 2
                entry: dict[int, int] = defaultdict(int)
                for mid, s in gw:
                    entry[row_of(ur + mid + v)] += s * factor
                for r, val in entry.items():
                    if val:
                        rows_i.append(r)
                        cols_i.append(col)
                        vals.append(val)
        offsets.append(len(columns))

    A = sp.csr_matrix((np.array(vals, dtype=float), (rows_i, cols_i)),
                      shape=(len(row_keys), len(columns)))
    b_exact = [Fraction(0)] * len(row_keys)
    for w, c in (f + epsilon).coeffs.items():
        b_exact[row_index[orbit_key(w)]] += c
    return GramProblem(f, epsilon, k, bases, row_keys, columns, offsets, A, b_exact, row_index)


def _comm_gen(i: int, n: int) -> list[tuple[tuple[int, ...], int]]:
    if i == 0:
        return [((0,) * n, 1)]
    sq = tuple(2 if j == i - 1 else 0 for j in range(n))
    return [((0,) * n, 1), (sq, -1)]


def build_comm_gram(g: CommPoly, epsilon, k: int) -> GramProblem:
    """Gram constraints for ``g + epsilon`` in the commutative quadratic
    module of the square, one row per monomial of degree <= 2k.  Bases and
    rows hold exponent tuples."""
    epsilon = Fraction(epsilon)
    if g.degree > 2 * k:
        raise DegreeTooHigh(f"degree {g.degree} exceeds 2k = {2 * k}")
    n = g.n
    bases = [monomials_up_to(n, k)] + [monomials_up_to(n, k - 1) if k >= 1 else [] for _ in range(n)]
    row_keys = monomials_up_to(n, 2 * k)
    row_index = {e: r for r, e in enumerate(row_keys)}
    rows_i, cols_i, vals = [], [], []
    columns: list[tuple[int, int, int]] = []
    offsets = [0]
    for i, basis in enumerate(bases):
        gw = _comm_gen(i, n)
        for a, u in enumerate(basis):
            for b in range(a, len(basis)):
                v = basis[b]
                col = len(columns)
                columns.append((i, a, b))
                factor = 1 if a == b else 2
                for mid, s in gw:
                    e = tuple(x + y + z for x, y, z in zip(u, mid, v))
                    rows_i.append(row_index[e])
                    cols_i.append(col)
                    vals.append(s * factor)
        offsets.append(len(columns))
    A = sp.csr_matrix((np.array(vals, dtype=float), (rows_i, cols_i)),
                      shape=(len(row_keys), len(columns)))
    unit = (0,) * n
    b_exact = [Fraction(0)] * len(row_keys)
    for e, c in (g + epsilon).coeffs.items():
        b_exact[row_index[e]] += c
    return GramProblem(g, epsilon, k, bases, row_keys, columns, offsets, A, b_exact, row_index, unit)
