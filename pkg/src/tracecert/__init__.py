"""Certify, refute and explore trace-nonnegativity of noncommutative
polynomials on self-adjoint contractions."""

from .commutative import CommPoly
from .ncpoly import (
    CyclicClass,
    NcPoly,
    NotCyclicallyZero,
    Word,
    commutative_project,
    commutator_decomposition,
    cyc_equiv,
    cyclic_canonical,
    cyclic_sort_section,
    hermitian_cyclic_part,
    involution,
    is_cyclically_sorted,
    multihomogeneous_parts,
    polarize_step,
    resubstitute,
)
from .parsing import ParseError, format_poly, parse

__all__ = [
    "CommPoly", "CyclicClass", "NcPoly", "NotCyclicallyZero", "Word", "commutative_project",
    "commutator_decomposition", "cyc_equiv", "cyclic_canonical", "cyclic_sort_section",
    "hermitian_cyclic_part", "involution", "is_cyclically_sorted", "multihomogeneous_parts",
    "polarize_step", "resubstitute", "ParseError", "format_poly", "parse",
]

__version__ = "0.1.0"
