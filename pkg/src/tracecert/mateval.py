"""Evaluation of noncommutative polynomials on tuples of real symmetric
matrices: traces, a randomized falsifier, moment tables and a truncated GNS
model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .ncpoly import NcPoly, Word, word_key, words_up_to


@dataclass(frozen=True)
class MatTuple:
    """``n`` real symmetric ``s x s`` matrices, stacked as an ``(n, s, s)``
    array."""

    matrices: np.ndarray
    contraction: bool = False
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False, compare=False)

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected an (n, s, s) array, got shape {mats.shape}")
        if not np.allclose(mats, np.swapaxes(mats, 1, 2), rtol=0, atol=self.tol.symmetry):
            raise ValueError("matrices must be symmetric")
        if self.contraction and mats.size and spectral_norms(mats).max() > 1 + self.tol.contraction:
            raise ValueError("matrix marked as contraction has spectral norm above 1")
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def s(self) -> int:
        return self.matrices.shape[1]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    def to_dict(self) -> dict:
        return {"n": self.n, "s": self.s,
                "matrices": [m.reshape(-1).tolist() for m in self.matrices]}

    @classmethod
    def from_dict(cls, d: dict, contraction: bool = False) -> "MatTuple":
        n, s = int(d["n"]), int(d["s"])
        mats = np.array(d["matrices"], dtype=float).reshape(n, s, s)
        return cls(mats, contraction)


def spectral_norms(mats: np.ndarray) -> np.ndarray:
    return np.array([np.abs(np.linalg.eigvalsh(m)).max() if m.size else 0.0 for m in mats])


def _as_tuple(A) -> MatTuple:
    return A if isinstance(A, MatTuple) else MatTuple(np.asarray(A, dtype=float))


def _word_products(words, mats: np.ndarray) -> dict[Word, np.ndarray]:
    """Products for every word in ``words`` and all of their prefixes."""
    s = mats.shape[1]
    cache: dict[Word, np.ndarray] = {(): np.eye(s)}
    for w in sorted(set(words), key=word_key):
        for j in range(1, len(w) + 1):
            prefix = w[:j]
            if prefix not in cache:
                cache[prefix] = cache[w[:j - 1]] @ mats[w[j - 1] - 1]
    return cache


def evaluate(f: NcPoly, A) -> np.ndarray:
    A = _as_tuple(A)
    if f.n != A.n:
        raise ValueError(f"polynomial has {f.n} variables but {A.n} matrices were given")
    products = _word_products(f.coeffs, A.matrices)
    out = np.zeros((A.s, A.s))
    for w, c in f.coeffs.items():
        out += float(c) * products[w]
    return out


def trace_value(f: NcPoly, A, normalized: bool = False) -> float:
    A = _as_tuple(A)
    t = float(np.trace(evaluate(f, A)))
    return t / A.s if normalized else t


def psd_check(f: NcPoly, A, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    if not f.is_symmetric():
        raise ValueError("psd_check expects a symmetric polynomial")
    M = evaluate(f, A)
    return bool(np.linalg.eigvalsh((M + M.T) / 2).min() >= -tol.psd)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_contraction_tuple(n: int, s: int, rng_seed=None) -> MatTuple:
    """Symmetrized Gaussian matrices scaled to spectral norm ``u**(1/s)``,
    ``u`` uniform on [0, 1]; norms pile up near 1."""
    if s < 1:
        raise ValueError("matrix size must be at least 1")
    rng = _rng(rng_seed)
    mats = np.empty((n, s, s))
    for i in range(n):
        G = rng.standard_normal((s, s))
        H = (G + G.T) / 2
        norm = np.abs(np.linalg.eigvalsh(H)).max()
        scale = rng.uniform() ** (1.0 / s)
        mats[i] = H * (scale / norm) if norm > 0 else H
    return MatTuple(mats, contraction=True)


def project_contraction(M: np.ndarray) -> np.ndarray:
    """Nearest symmetric contraction in Frobenius norm."""
    S = (M + M.T) / 2
    vals, vecs = np.linalg.eigh(S)
    return (vecs * np.clip(vals, -1.0, 1.0)) @ vecs.T


@dataclass(frozen=True)
class Witness:
    """A contraction tuple on which the trace of the polynomial is negative."""

    tuple: MatTuple
    trace: float

    @property
    def normalized_trace(self) -> float:
        return self.trace / self.tuple.s

    def to_dict(self) -> dict:
        d = self.tuple.to_dict()
        d["trace"] = self.trace
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(MatTuple.from_dict(d, contraction=True), float(d["trace"]))


def _refine(f: NcPoly, A: MatTuple, iterations: int = 200, step: float = 0.25) -> MatTuple:
    """Coordinate descent on symmetric entry pairs with projection back onto
    the contraction ball; the step halves after a sweep without progress."""
    mats = A.matrices.copy()
    s = A.s
    best = trace_value(f, mats, normalized=True)
    entries = [(i, a, b) for i in range(A.n) for a in range(s) for b in range(a, s)]
    for _ in range(iterations):
        improved = False
        for i, a, b in entries:
            for delta in (step, -step):
                trial = mats.copy()
                M = trial[i].copy()
                M[a, b] += delta
                if a != b:
                    M[b, a] += delta
                trial[i] = project_contraction(M)
                val = trace_value(f, trial, normalized=True)
                if val < best:
                    best, mats, improved = val, trial, True
                    break
        if not improved:
            step /= 2
            if step < 1e-9:
                break
    return MatTuple(mats, contraction=True)


def falsify_trace_nonneg(f: NcPoly, max_size: int = 4, trials: int = 100, rng_seed=0,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         refine_iterations: int = 200) -> Witness | None:
    """Search for contractions with negative trace.  ``None`` means the
    sampling budget found nothing; it proves nothing."""
    if not f.is_symmetric():
        raise ValueError("falsify_trace_nonneg expects a symmetric polynomial")
    seeds = np.random.SeedSequence(rng_seed).spawn(max_size * trials)
    best_val, best = np.inf, None
    for size in range(1, max_size + 1):
        for t in range(trials):
            A = sample_contraction_tuple(f.n, size, np.random.default_rng(seeds[(size - 1) * trials + t]))
            val = trace_value(f, A, normalized=True)
            if val < best_val:
                best_val, best = val, A
    if best is None:
        return None
    refined = _refine(f, best, refine_iterations)
    if trace_value(f, refined, normalized=True) >= best_val:
        refined = best
    trace = trace_value(f, refined)
    if trace < -tol.negative_trace:
        return Witness(refined, trace)
    return None


# moments


class Functional(Protocol):
    max_length: int

    def value(self, w: Word) -> float: ...


@dataclass(frozen=True)
class MomentTable:
    """Normalized trace moments ``(1/s) tr(w(A))`` for words of length <= k."""

    k: int
    n: int
    values: dict[Word, float]

    @property
    def max_length(self) -> int:
        return self.k

    def value(self, w: Word) -> float:
        return self.values[tuple(w)]

    def __getitem__(self, w: Word) -> float:
        return self.values[tuple(w)]

    def to_dict(self) -> dict:
        from .parsing import format_word

        return {"k": self.k, "n": self.n,
                "values": {format_word(w): v for w, v in sorted(self.values.items(), key=lambda t: word_key(t[0]))}}

    @classmethod
    def from_dict(cls, d: dict) -> "MomentTable":
        from .parsing import parse

        n = int(d["n"])
        values = {}
        for text, v in d["values"].items():
            values[next(iter(parse(text, n).coeffs))] = float(v)
        return cls(int(d["k"]), n, values)


def moment_table(A, k: int) -> MomentTable:
    if isinstance(A, GnsModel):
        return A.moment_table(k)
    A = _as_tuple(A)
    words = words_up_to(A.n, k)
    products = _word_products(words, A.matrices)
    return MomentTable(k, A.n, {w: float(np.trace(products[w])) / A.s for w in words})


def moment_distance(t1: MomentTable, t2: MomentTable) -> float:
    if t1.k != t2.k or t1.n != t2.n:
        raise ValueError("moment tables have different degree bounds or variable counts")
    return max(abs(t1.values[w] - t2.values[w]) for w in t1.values)


def moment_matrix(L: Functional, n: int, k: int, gen: int = 0) -> np.ndarray:
    """``[L(u* p_gen v)]`` over words of length <= k (gen 0) or <= k-1."""
    basis = words_up_to(n, k if gen == 0 else k - 1)
    M = np.empty((len(basis), len(basis)))
    for a, u in enumerate(basis):
        ur = u[::-1]
        for b, v in enumerate(basis):
            val = L.value(ur + v)
            if gen:
                val -= L.value(ur + (gen, gen) + v)
            M[a, b] = val
    return (M + M.T) / 2


# GNS at finite truncation


@dataclass(frozen=True)
class GnsModel:
    """Compressed multiplication operators on the quotient of the span of
    short words by the numerical kernel of the functional."""

    operators: np.ndarray
    vector: np.ndarray
    basis: list[Word]
    kernel_dim: int
    defect: float
    exact_length: int

    @property
    def dimension(self) -> int:
        return self.operators.shape[1]

    @property
    def n(self) -> int:
        return self.operators.shape[0]

    def state(self, w: Word) -> float:
        v = self.vector
        for letter in reversed(w):
            v = self.operators[letter - 1] @ v
        return float(self.vector @ v)

    def moment_table(self, k: int) -> MomentTable:
        """Moments of the cyclic vector state ``<w(X) xi, xi>``."""
        return MomentTable(k, self.n, {w: self.state(w) for w in words_up_to(self.n, k)})

    def as_tuple(self) -> MatTuple:
        return MatTuple(self.operators, contraction=True)


class IndefiniteMoments(ValueError):
    pass


def gns_truncated(L: Functional, k: int, n: int | None = None,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> GnsModel:
    """Truncated GNS model of ``L`` known on words of length <= 2k.

    The space is spanned by words of length <= k-1 so that every operator
    entry ``L(u* X_i v)`` is known; the state of the model reproduces ``L``
    on words of length <= 2k-1 up to the kernel cutoff."""
    n = n if n is not None else L.n
    if L.max_length < 2 * k:
        raise ValueError(f"functional known up to length {L.max_length}, need {2 * k}")
    full = moment_matrix(L, n, k)
    lam_full = np.linalg.eigvalsh(full)
    scale = max(abs(lam_full).max(), 1.0)
    if lam_full.min() < -tol.dual_conditions * scale:
        raise IndefiniteMoments(f"moment matrix has eigenvalue {lam_full.min():.3e}")

    basis = words_up_to(n, max(k - 1, 0))
    H = moment_matrix(L, n, max(k - 1, 0))
    vals, vecs = np.linalg.eigh(H)
    keep = vals > tol.gns_cutoff * max(vals.max(), 0.0)
    W = vecs[:, keep] / np.sqrt(vals[keep])
    ops = []
    for i in range(1, n + 1):
        T = np.empty((len(basis), len(basis)))
        for a, u in enumerate(basis):
            ur = u[::-1]
            for b, v in enumerate(basis):
                T[a, b] = L.value(ur + (i,) + v)
        Xi = W.T @ ((T + T.T) / 2) @ W
        ops.append(project_contraction(Xi))
    ops = np.array(ops) if ops else np.zeros((0, int(keep.sum()), int(keep.sum())))
    unit = basis.index(())
    xi = W.T @ H[:, unit]
    model = GnsModel(ops, xi, basis, int((~keep).sum()), 0.0, 2 * k - 1)
    defect = max(abs(model.state(w) - L.value(w)) for w in words_up_to(n, 2 * k))
    return GnsModel(ops, xi, basis, model.kernel_dim, defect, 2 * k - 1)


# special tuples


def real_embedding(mats: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOLERANCES) -> MatTuple:
    """Replace each entry ``a + ib`` by the block ``[[a, -b], [b, a]]``."""
    out = []
    for M in mats:
        M = np.asarray(M, dtype=complex)
        if not np.allclose(M, M.conj().T, rtol=0, atol=tol.symmetry):
            raise ValueError("input matrix is not self-adjoint")
        a, b = M.real, M.imag
        out.append(np.block([[a, -b], [b, a]]))
    return MatTuple(np.array(out))


def multilinear_witness(n: int) -> MatTuple:
    """``E_{i,i+1} + E_{i+1,i}`` (indices mod n) as n matrices of size n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    mats = np.zeros((n, n, n))
    for i in range(n):
        j = (i + 1) % n
        mats[i, i, j] = mats[i, j, i] = 1.0
    return MatTuple(mats, contraction=True)


def tuple_to_json(A: MatTuple) -> str:
    return json.dumps(A.to_dict())
