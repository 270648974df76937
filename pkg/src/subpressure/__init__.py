"""Closed-form subadditive pressure for diagonal and triangularisable matrix systems."""

from subpressure.analysis import (
    PhaseTransition,
    PressureProfile,
    PressureSegment,
    TransitionKind,
    affinity_dimension,
    build_profile,
    check_analyticity_condition,
    curve_data,
    find_transitions,
    one_sided_derivatives,
    pressure,
    transition_bound,
)
from subpressure.dirichlet import DirichletPolynomial, Root, isolate_zeros
from subpressure.errors import PressureError
from subpressure.linalg import MatrixSystem
from subpressure.oracle import OracleEstimate, det_pressure, finite_k_pressure, phi
from subpressure.ordered import (
    DiagonalSystem,
    OrderedKey,
    enumerate_keys,
    ordered_pressure_eval,
    ordered_pressure_poly,
    ordered_svf,
    reduce_to_diagonal,
)

__version__ = "0.1.0"

__all__ = [
    "DiagonalSystem",
    "DirichletPolynomial",
    "MatrixSystem",
    "OracleEstimate",
    "OrderedKey",
    "PhaseTransition",
    "PressureError",
    "PressureProfile",
    "PressureSegment",
    "Root",
    "TransitionKind",
    "affinity_dimension",
    "build_profile",
    "check_analyticity_condition",
    "curve_data",
    "det_pressure",
    "enumerate_keys",
    "finite_k_pressure",
    "find_transitions",
    "isolate_zeros",
    "one_sided_derivatives",
    "ordered_pressure_eval",
    "ordered_pressure_poly",
    "ordered_svf",
    "phi",
    "pressure",
    "reduce_to_diagonal",
    "transition_bound",
]
