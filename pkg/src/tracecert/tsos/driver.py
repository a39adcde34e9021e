"""Solve, round and certify: the user-facing entry points of the module."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..certkit import (Certificate, CommutativeCertificate, close_with_commutators, putinar_lift,
                       verify, verify_commutative)
from ..commutative import CommPoly
from ..config import DEFAULT_SOLVER, DEFAULT_TOLERANCES, SolverConfig, Tolerances
from ..ncpoly import (NcPoly, commutative_project, cyc_equiv, hermitian_cyclic_part,
                      is_cyclically_sorted)
from .dual import DualExtractionError, TracialFunctional, extract_dual, zero_tuple_functional
from .gram import DegreeTooHigh, GramProblem, build_comm_gram, build_gram
from .rounding import RoundingFailure, factor_terms, round_certificate, rounded_blocks
from .solver import NumericResult, douglas_rachford, dual_search

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible-with-dual"
UNDECIDED = "undecided"


@dataclass
class SolveReport:
    status: str
    iterations: int = 0
    residuals: dict[str, float] = field(default_factory=dict)
    certificate: Certificate | None = None
    functional: TracialFunctional | None = None
    level: int | None = None
    note: str = ""

    @property
    def exit_code(self) -> int:
        return {FEASIBLE: 0, INFEASIBLE: 2}.get(self.status, 3)


def _margin(problem: GramProblem, cfg: SolverConfig) -> float:
    """Eigenvalue floor for the numeric blocks: a share of epsilon spread
    over the total block dimension, so that rounding errors are absorbed."""
    return cfg.shrink * float(problem.epsilon) / max(1, sum(problem.block_sizes))


def _try_round(problem: GramProblem, result: NumericResult, cfg: SolverConfig) -> Certificate | None:
    try:
        cert = round_certificate(problem, result.blocks, cfg.denominator, cfg.max_denominator)
    except RoundingFailure as exc:
        log.info("rounding failed at level %d: %s", problem.k, exc)
        return None
    report = verify(cert)
    if not report:
        log.warning("rounded certificate failed verification: %s", report.describe())
        return None
    return cert


def _dual_probe(problem: GramProblem, tol: Tolerances, seed: int):
    def probe(rows: np.ndarray):
        try:
            return extract_dual(problem, rows, tol, seed)
        except DualExtractionError:
            return None
    return probe


def _dual_from_hint(problem: GramProblem, hint: np.ndarray | None, cfg: SolverConfig,
                    tol: Tolerances, seed: int) -> tuple[TracialFunctional | None, int]:
    """Search the dual side directly for a separating functional, aiming at
    a target value suggested by the primal multipliers."""
    b = problem.b
    unit = problem.unit_row
    if np.allclose(np.delete(b, unit), 0.0):
        return None, 0
    taus = []
    if hint is not None and hint[unit] > 0 and hint @ b < 0:
        taus.append(-0.5 * float(hint @ b) / float(hint[unit]))
    taus += [1e-2, 1e-3, 1e-4]
    probe = _dual_probe(problem, tol, seed)
    spent = 0
    for tau in taus:
        res = dual_search(problem, tau, cfg, probe=probe)
        spent += res.iterations
        if res.evidence is not None:
            return res.evidence, spent
        if res.dual is not None:
            found = probe(res.dual)
            if found is not None:
                return found, spent
    return None, spent


def solve(problem: GramProblem, cfg: SolverConfig = DEFAULT_SOLVER,
          tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0) -> SolveReport:
    """Decide (numerically) whether ``f + epsilon`` lies in the level-k
    module modulo cyclic equivalence.  A feasible answer always carries an
    exactly verified certificate."""
    if (problem.f + problem.epsilon).coeff(problem.unit) < 0:
        L = zero_tuple_functional(problem.n, problem.k)
        return SolveReport(INFEASIBLE, 0, {}, functional=L, level=problem.k,
                           note="negative constant term")
    iterations = 0
    probe = _dual_probe(problem, tol, seed)
    if problem.epsilon > 0:
        res = douglas_rachford(problem, _margin(problem, cfg), cfg)
        iterations += res.iterations
        if res.status == "feasible":
            cert = _try_round(problem, res, cfg)
            if cert is not None:
                return SolveReport(FEASIBLE, iterations, {"affine": res.residual, "margin": res.margin},
                                   certificate=cert, level=problem.k)
    res = douglas_rachford(problem, 0.0, cfg, probe=probe)
    iterations += res.iterations
    residuals = {"affine": res.residual, "gap": res.gap}
    if res.evidence is not None:
        return SolveReport(INFEASIBLE, iterations, residuals, functional=res.evidence, level=problem.k)
    if res.status == "feasible":
        # no margin to absorb rounding; this still succeeds when the rounded
        # blocks happen to be exactly semidefinite
        cert = _try_round(problem, res, cfg)
        if cert is not None:
            return SolveReport(FEASIBLE, iterations, residuals, certificate=cert, level=problem.k)
        return SolveReport(UNDECIDED, iterations, residuals, level=problem.k,
                           note="numerically feasible but not exactly certified")
    L, spent = _dual_from_hint(problem, res.dual, cfg, tol, seed)
    iterations += spent
    if L is not None:
        return SolveReport(INFEASIBLE, iterations, residuals, functional=L, level=problem.k)
    return SolveReport(UNDECIDED, iterations, residuals, level=problem.k)


class PutinarSearchFailure(RuntimeError):
    pass


def commutative_putinar_search(g: CommPoly, epsilon, k: int,
                               cfg: SolverConfig = DEFAULT_SOLVER) -> CommutativeCertificate:
    """Exact certificate ``g + epsilon = sum s_j^2 + sum (1 - x^2) q_j^2 +
    sum (1 - y^2) r_j^2`` with degrees bounded by ``2k``."""
    epsilon = Fraction(epsilon)
    if g.n != 2:
        raise ValueError("the commutative search is for two variables")
    problem = build_comm_gram(g, epsilon, k)
    if (g + epsilon).coeff((0, 0)) < 0:
        raise PutinarSearchFailure("negative value at the origin")
    res = douglas_rachford(problem, _margin(problem, cfg), cfg)
    if res.status != "feasible":
        raise PutinarSearchFailure(f"no numeric solution at level {k} ({res.status})")
    D = cfg.denominator
    while D <= cfg.max_denominator:
        try:
            exact = rounded_blocks(problem, res.blocks, D)
            triples = factor_terms(problem, exact, lambda c: CommPoly(2, c))
            break
        except RoundingFailure:
            D *= 2
    else:
        raise PutinarSearchFailure(f"rounding failed at level {k}")
    parts: list[list] = [[], [], []]
    for i, lam, p in triples:
        parts[i].append((lam, p))
    cc = CommutativeCertificate(g, epsilon, tuple(parts[0]), tuple(parts[1]), tuple(parts[2]))
    if not verify_commutative(cc):
        raise PutinarSearchFailure("rounded commutative certificate does not verify")
    return cc


def _min_level(f: NcPoly) -> int:
    return max(1, math.ceil(max(f.degree, 0) / 2))


def certify(f: NcPoly, epsilon, k_max: int, cfg: SolverConfig = DEFAULT_SOLVER,
            fast_path: str = "auto", tol: Tolerances = DEFAULT_TOLERANCES,
            seed: int = 0) -> SolveReport:
    """First verified certificate for ``f + epsilon`` over the level
    schedule, or the evidence gathered at the last level tried."""
    epsilon = Fraction(epsilon)
    if fast_path not in ("auto", "on", "off"):
        raise ValueError("fast_path must be auto, on or off")
    if not cyc_equiv(f, f.adj()):
        raise ValueError("certify expects f cyclically equivalent to its adjoint")
    g = hermitian_cyclic_part(f) if f != f.adj() else f
    sorted_ok = f.n == 2 and is_cyclically_sorted(g)
    if fast_path == "on" and not sorted_ok:
        raise ValueError("the sorted fast path needs a cyclically sorted polynomial in two variables")
    if sorted_ok and fast_path != "off" and epsilon > 0:
        proj = commutative_project(g)
        for k in range(_min_level(g), k_max + 1):
            try:
                cc = commutative_putinar_search(proj, epsilon, k, cfg)
            except PutinarSearchFailure as exc:
                log.info("sorted path, level %d: %s", k, exc)
                continue
            cert = close_with_commutators(f, epsilon, putinar_lift(cc, g).terms)
            if verify(cert):
                return SolveReport(FEASIBLE, 0, {}, certificate=cert, level=k, note="sorted fast path")
        if fast_path == "on":
            return SolveReport(UNDECIDED, 0, {}, note=f"sorted fast path failed up to level {k_max}")
    last = SolveReport(UNDECIDED, 0, {}, note="no level tried")
    for k in range(_min_level(g), k_max + 1):
        try:
            problem = build_gram(g, epsilon, k)
        except DegreeTooHigh:
            continue
        report = solve(problem, cfg, tol, seed)
        log.info("level %d: %s after %d iterations", k, report.status, report.iterations)
        if report.status == FEASIBLE:
            if g != f:
                report.certificate = close_with_commutators(f, epsilon, report.certificate.terms)
            return report
        last = report
    return last

