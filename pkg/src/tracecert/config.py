"""Floating-point tolerances and solver settings in one place."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    symmetry: float = 1e-12
    contraction: float = 1e-9
    negative_trace: float = 1e-9
    psd: float = 1e-9
    moment: float = 1e-9
    gns_cutoff: float = 1e-8
    dual_conditions: float = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 100_000
    feas_tol: float = 1e-9
    stall_window: int = 1_000
    # fraction of epsilon spent on the eigenvalue margin that absorbs rounding
    shrink: float = 0.5
    relaxation: float = 1.0
    denominator: int = 10**6
    max_denominator: int = 10**12


@dataclass(frozen=True)
class Config:
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: str = "human"

    def with_seed(self, seed: int | None) -> "Config":
        return self if seed is None else replace(self, seed=seed)


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_SOLVER = SolverConfig()


def default_seed() -> int:
    return int(os.environ.get("TRACECERT_SEED", "0"))
