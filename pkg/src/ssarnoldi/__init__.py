"""Sketch-and-select Arnoldi: randomized Krylov bases built by projecting
each new vector against a few selected earlier ones."""

from .analysis import (
    BoundDomainError,
    adversarial_next_vector,
    bound_report,
    cond_upper_bound,
    decay_recurrence,
    performance_profile,
    sigma_min_lower_bound,
)
from .arnoldi import ArnoldiConfig, StopReason, arnoldi_run
from .linalg import CsrMatrix, QrUpdatable, cond2, jacobi_svd, least_squares, singular_values
from .matrix_io import ProblemSpec, generate, make_rhs, read_matrix_market, write_matrix_market
from .selection import STRATEGIES, SelectionResult, select
from .sketching import SketchOperator, apply, embedding_distortion, make_sketch
from .solvers import SolveReport, gmres, sgmres

__all__ = [
    "ArnoldiConfig", "BoundDomainError", "CsrMatrix", "ProblemSpec", "QrUpdatable", "STRATEGIES",
    "SelectionResult", "SketchOperator", "SolveReport", "StopReason", "adversarial_next_vector", "apply",
    "arnoldi_run", "bound_report", "cond2", "cond_upper_bound", "decay_recurrence", "embedding_distortion",
    "generate", "gmres", "jacobi_svd", "least_squares", "make_rhs", "make_sketch", "performance_profile",
    "read_matrix_market", "select", "sgmres", "sigma_min_lower_bound", "singular_values",
    "write_matrix_market",
]
