"""Gram-matrix feasibility, exact rounding and dual evidence."""

from .driver import (FEASIBLE, INFEASIBLE, UNDECIDED, PutinarSearchFailure, SolveReport, certify,
                     commutative_putinar_search, solve)
from .dual import (DualCheck, DualExtractionError, TracialFunctional, check_conditions, extract_dual,
                   zero_tuple_functional)
from .gram import DegreeTooHigh, GramProblem, build_comm_gram, build_gram
from .rounding import RoundingFailure, round_certificate
from .solver import NumericResult, douglas_rachford, dual_search

__all__ = [
    "FEASIBLE", "INFEASIBLE", "UNDECIDED", "PutinarSearchFailure", "SolveReport", "certify",
    "commutative_putinar_search", "solve", "DualCheck", "DualExtractionError", "TracialFunctional",
    "check_conditions", "extract_dual", "zero_tuple_functional", "DegreeTooHigh", "GramProblem",
    "build_comm_gram", "build_gram", "RoundingFailure", "round_certificate", "NumericResult",
    "douglas_rachford", "dual_search",
]
