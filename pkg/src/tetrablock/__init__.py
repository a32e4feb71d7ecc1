"""Numerical verification toolkit for tetrablock contractions and their unitary dilations."""

from .config import InstanceSpec, RunConfig
from .dilation import (
    Dilation,
    DilationHypothesisError,
    DilationVector,
    SpaceDims,
    VectorBatch,
    build_isometric_dilation,
    build_unitary_dilation,
    dilation_from,
    truncate_to_matrix,
)
from .domain import (
    TetraPoint,
    brute_force_membership,
    is_tetrablock_unitary,
    point_in_bE,
    point_in_closure,
)
from .fundamental import (
    FundamentalEquationError,
    FundamentalPair,
    OperatorTriple,
    solve_adjoint_fundamental,
    solve_fundamental,
)
from .linalg import defect_operator, numerical_radius, operator_norm
from .report import VerificationReport
from .suite import run_suite, verify_triple

__all__ = [
    "Dilation", "DilationHypothesisError", "DilationVector", "FundamentalEquationError",
    "FundamentalPair", "InstanceSpec", "OperatorTriple", "RunConfig", "SpaceDims",
    "TetraPoint", "VectorBatch", "VerificationReport", "brute_force_membership",
    "build_isometric_dilation", "build_unitary_dilation", "defect_operator", "dilation_from",
    "is_tetrablock_unitary", "numerical_radius", "operator_norm", "point_in_bE",
    "point_in_closure", "run_suite", "solve_adjoint_fundamental", "solve_fundamental",
    "truncate_to_matrix", "verify_triple",
]
