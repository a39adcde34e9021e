"""Tracial functionals separating a polynomial from the truncated module."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..mateval import MatTuple, moment_table, sample_contraction_tuple
from ..ncpoly import NcPoly, Word, least_rotation, word_key
from ..parsing import format_word, parse
from .gram import GramProblem, orbit_key


@dataclass
class TracialFunctional:
    """Values of a linear functional on rotation classes of words of length
    at most ``2k``, keyed by least rotation."""

    k: int
    n: int
    values: dict[Word, float]

    @property
    def max_length(self) -> int:
        return 2 * self.k

    def value(self, w: Word) -> float:
        return self.values[least_rotation(tuple(w))]

    def __call__(self, f: NcPoly) -> float:
        return sum(float(c) * self.value(w) for w, c in f.coeffs.items())

    def to_dict(self) -> dict:
        return {"level": self.k,
                "values": {format_word(w): v for w, v in sorted(self.values.items(), key=lambda t: word_key(t[0]))}}

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "TracialFunctional":
        values = {}
        for text, v in d["values"].items():
            word = next(iter(parse(text, n).coeffs))
            values[least_rotation(word)] = float(v)
        return cls(int(d["level"]), n, values)


def functional_from_rows(problem: GramProblem, row_values: np.ndarray) -> TracialFunctional:
    values = {}
    for w in _all_class_reps(problem.n, 2 * problem.k):
        values[w] = float(row_values[problem.row_index[orbit_key(w)]])
    return TracialFunctional(problem.k, problem.n, values)


def _all_class_reps(n: int, length: int) -> list[Word]:
    from ..ncpoly import words_up_to

    return sorted({least_rotation(w) for w in words_up_to(n, length)}, key=word_key)


@dataclass
class DualCheck:
    """Residuals of the five conditions on a separating functional."""

    trace_defect: float  # (a)
    min_eigenvalue: float  # (b)
    max_abs_word: float  # (c), to be <= 2
    unit_defect: float  # (d)
    symmetry_defect: float  # (e)
    value_at_target: float
    tol: float = field(default=DEFAULT_TOLERANCES.dual_conditions)

    @property
    def conditions(self) -> dict[str, bool]:
        return {
            "a": self.trace_defect <= self.tol,
            "b": self.min_eigenvalue >= -self.tol,
            "c": self.max_abs_word <= 2 + self.tol,
            "d": self.unit_defect <= self.tol,
            "e": self.symmetry_defect <= self.tol,
        }

    @property
    def ok(self) -> bool:
        return all(self.conditions.values()) and self.value_at_target < 0


def check_conditions(L: TracialFunctional, problem: GramProblem,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> DualCheck:
    from ..ncpoly import words_up_to

    words = words_up_to(problem.n, 2 * problem.k)
    # (a) is structural: values live on rotation classes; recheck on raw words
    trace_defect = max((abs(L.value(w) - L.value(w[1:] + w[:1])) for w in words if w), default=0.0)
    rows = np.array([L.value(w) for w in problem.rows])
    mats = problem.localizing_matrices(rows)
    min_eig = min(np.linalg.eigvalsh(M).min() for M in mats if M.size)
    max_abs = max(abs(v) for v in L.values.values())
    unit = abs(L.value(()) - 1.0)
    sym = max(abs(L.value(w) - L.value(w[::-1])) for w in words)
    target = L(problem.f + problem.epsilon)
    return DualCheck(trace_defect, float(min_eig), max_abs, unit, sym, target, tol.dual_conditions)


def zero_tuple_functional(n: int, k: int) -> TracialFunctional:
    """Evaluation at the zero tuple: 1 on the unit word, 0 elsewhere."""
    return TracialFunctional(k, n, {w: (1.0 if not w else 0.0) for w in _all_class_reps(n, 2 * k)})


def interior_rows(problem: GramProblem, seed: int = 0, scale: float = 0.9) -> np.ndarray:
    """Row values of an average of normalized traces on random contractions
    of norm at most ``scale``; its localizing matrices are positive definite
    once the tuples are large and numerous enough."""
    n, k = problem.n, problem.k
    size = max(2, int(np.ceil(np.sqrt(len(problem.bases[0])))) + 1)
    count = 4
    rng = np.random.default_rng(seed)
    acc = np.zeros(len(problem.rows))
    for _ in range(count):
        A = sample_contraction_tuple(n, size, rng)
        mats = A.matrices * (scale / max(np.abs(np.linalg.eigvalsh(m)).max() for m in A.matrices))
        table = moment_table(MatTuple(mats, contraction=True), 2 * k)
        acc += np.array([table[w] for w in problem.rows])
    return acc / count


class DualExtractionError(RuntimeError):
    def __init__(self, message: str, check: DualCheck | None = None):
        self.check = check
        super().__init__(message)


def _min_eig(problem: GramProblem, rows: np.ndarray) -> float:
    return min(np.linalg.eigvalsh(M).min() for M in problem.localizing_matrices(rows) if M.size)


def extract_dual(problem: GramProblem, raw: np.ndarray | None,
                 tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0) -> TracialFunctional:
    """Normalize a raw separating direction into a functional with
    ``L(1) = 1`` and ``L(f + epsilon) < 0``.

    When ``raw`` fails the conditions on its own (or kills constants), it is
    combined with a strictly positive functional, ``L = L_int + mu * raw``,
    with ``mu`` between the smallest value making ``L(f + epsilon)`` negative
    and the largest keeping the localizing matrices PSD."""
    k, n = problem.k, problem.n
    b = problem.b
    unit = problem.unit_row
    if (problem.f + problem.epsilon).coeff(()) < 0:
        return _finish(zero_tuple_functional(n, k), problem, tol)
    if raw is None:
        raise DualExtractionError("no separating direction available")
    raw = np.asarray(raw, dtype=float)
    at_target = float(raw @ b)
    if at_target >= 0:
        raise DualExtractionError("direction does not separate: L(f + eps) >= 0")
    candidates = []
    if raw[unit] > 0:
        candidates.append(raw / raw[unit])
    inner = interior_rows(problem, seed)
    inner_min = _min_eig(problem, inner)
    raw_min = _min_eig(problem, raw)
    mu_lo = max(float(inner @ b), 0.0) / -at_target
    mu_hi = inner_min / -raw_min if raw_min < 0 else np.inf
    if mu_lo < mu_hi:
        mu = 2 * mu_lo if not np.isfinite(mu_hi) else np.sqrt(max(mu_lo, 1e-300) * mu_hi)
        mixed = inner + mu * raw
        if mixed[unit] > 0:
            candidates.append(mixed / mixed[unit])
    last = None
    for rows in candidates:
        L = functional_from_rows(problem, rows)
        check = check_conditions(L, problem, tol)
        if check.ok:
            return L
        last = check
    raise DualExtractionError("could not meet the functional conditions", last)


def _finish(L: TracialFunctional, problem: GramProblem, tol: Tolerances) -> TracialFunctional:
    check = check_conditions(L, problem, tol)
    if not check.ok:
        raise DualExtractionError("functional fails the conditions", check)
    return L
