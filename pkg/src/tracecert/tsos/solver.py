"""Projection solver for block-PSD feasibility under affine constraints.

Douglas-Rachford iteration (averaged alternating reflections) between the
affine set ``{x : A x = b}`` and the product of PSD cones, optionally shifted
to ``{G >= delta I}``.  When the two sets do not meet, the iterate
differences converge to the minimal displacement vector between them, which
is the image ``A^T lam`` of a separating functional ``lam``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from ..config import DEFAULT_SOLVER, SolverConfig

log = logging.getLogger(__name__)


@dataclass
class NumericResult:
    status: str  # "feasible" | "infeasible" | "undecided"
    iterations: int
    residual: float
    gap: float
    blocks: list[np.ndarray] = field(default_factory=list)
    dual: np.ndarray | None = None
    margin: float = 0.0
    evidence: object = None


class AffineProjector:
    """Orthogonal projection onto ``{x : A x = b}`` for a full-row-rank
    ``A``, via a Cholesky factor of ``A A^T``."""

    def __init__(self, A, b):
        self.A = A
        self.b = np.asarray(b, dtype=float)
        AAt = (A @ A.T).toarray() if hasattr(A, "toarray") else A @ A.T
        self.chol = la.cho_factor(AAt)

    def multipliers(self, r: np.ndarray) -> np.ndarray:
        return la.cho_solve(self.chol, r)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        r = self.A @ x - self.b
        return x - self.A.T @ self.multipliers(r)


def project_blocks(x: np.ndarray, problem, delta: float = 0.0) -> np.ndarray:
    """Clip the eigenvalues of every block at ``delta`` (scaled coordinates)."""
    blocks = problem.blocks_from_vector(x, scaled=True)
    out = []
    for G in blocks:
        if G.size == 0:
            out.append(G)
            continue
        vals, vecs = np.linalg.eigh(G)
        out.append((vecs * np.maximum(vals, delta)) @ vecs.T)
    return problem.vector_from_blocks(out, scaled=True)


def min_eigenvalue(blocks) -> float:
    return min((np.linalg.eigvalsh(G).min() for G in blocks if G.size), default=np.inf)


def douglas_rachford(problem, delta: float = 0.0, cfg: SolverConfig = DEFAULT_SOLVER,
                     start: np.ndarray | None = None, probe=None, probe_every: int = 100) -> NumericResult:
    """Find blocks ``G_i >= delta I`` meeting the affine constraints.

    Feasible when the affine residual of the cone point drops below
    ``cfg.feas_tol``; infeasible when the gap between the two sets stops
    shrinking for ``cfg.stall_window`` iterations while staying well above the
    tolerance.  ``probe``, if given, is called every ``probe_every``
    iterations with the current multiplier estimate and may return evidence
    of infeasibility (anything not None) to stop early."""
    A = problem.A_scaled
    proj_a = AffineProjector(A, problem.b)
    z = np.zeros(A.shape[1]) if start is None else start.copy()
    alpha = cfg.relaxation
    history: list[float] = []
    bnorm = 1.0 + np.abs(problem.b).max()
    x = y = z
    for it in range(1, cfg.max_iter + 1):
        x = proj_a(z)
        y = project_blocks(2 * x - z, problem, delta)
        step = y - x
        z = z + alpha * step
        gap = float(np.linalg.norm(step))
        residual = float(np.abs(A @ y - problem.b).max())
        history.append(gap)
        if residual <= cfg.feas_tol * bnorm:
            blocks = problem.blocks_from_vector(y, scaled=True)
            return NumericResult("feasible", it, residual, gap, blocks, margin=min_eigenvalue(blocks))
        if probe is not None and it % probe_every == 0 and gap > 1e3 * cfg.feas_tol:
            lam = proj_a.multipliers(A @ step)
            evidence = probe(lam)
            if evidence is not None:
                return NumericResult("infeasible", it, residual, gap, dual=lam, evidence=evidence)
        if it > 2 * cfg.stall_window and gap > 1e3 * cfg.feas_tol:
            old = history[-cfg.stall_window]
            if old - gap <= 1e-4 * gap:
                lam = proj_a.multipliers(A @ step)
                log.debug("stalled at iteration %d with gap %.3e", it, gap)
                return NumericResult("infeasible", it, residual, gap, dual=lam)
    residual = float(np.abs(A @ y - problem.b).max())
    return NumericResult("undecided", cfg.max_iter, residual, history[-1] if history else 0.0)


class DualAffineProjector:
    """Projection onto ``{A^T y : y[unit] = 1, b.y = -tau}`` in scaled
    coordinates, where ``A^T y`` lists the localizing matrices of ``y``."""

    def __init__(self, A, b, unit: int, tau: float):
        self.A = A
        self.inner = AffineProjector(A, np.zeros(A.shape[0]))
        C = np.zeros((2, A.shape[0]))
        C[0, unit] = 1.0
        C[1] = b
        self.C = C
        self.d = np.array([1.0, -tau])
        self.MinvCt = self.inner.multipliers(C.T)
        self.S = la.cho_factor(C @ self.MinvCt)

    def rows(self, v: np.ndarray) -> np.ndarray:
        y0 = self.inner.multipliers(self.A @ v)
        mu = la.cho_solve(self.S, self.C @ y0 - self.d)
        return y0 - self.MinvCt @ mu

    def __call__(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.rows(v)
        return self.A.T @ y, y


def dual_search(problem, tau: float, cfg: SolverConfig = DEFAULT_SOLVER,
                probe=None, probe_every: int = 100) -> NumericResult:
    """Look for row values ``y`` with ``y(1) = 1``, ``y(f + eps) = -tau`` and
    positive semidefinite localizing matrices, by the same reflection scheme
    run on the dual side."""
    A = problem.A_scaled
    proj = DualAffineProjector(A, problem.b, problem.unit_row, tau)
    z = np.zeros(A.shape[1])
    history: list[float] = []
    y = None
    for it in range(1, cfg.max_iter + 1):
        x, y = proj(z)
        w = project_blocks(2 * x - z, problem)
        step = w - x
        z = z + cfg.relaxation * step
        gap = float(np.linalg.norm(step))
        history.append(gap)
        if gap <= cfg.feas_tol:
            # the cone point is PSD and within ``gap`` of the affine point
            _, y = proj(w)
            return NumericResult("feasible", it, gap, gap, dual=y)
        if probe is not None and it % probe_every == 0:
            evidence = probe(y)
            if evidence is not None:
                return NumericResult("feasible", it, gap, gap, dual=y, evidence=evidence)
        if it > 2 * cfg.stall_window:
            old = history[-cfg.stall_window]
            if old - gap <= 1e-4 * gap:
                return NumericResult("infeasible", it, gap, gap, dual=y)
    return NumericResult("undecided", cfg.max_iter, history[-1], history[-1], dual=y)
