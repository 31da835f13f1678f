"""Modified-equation identification for finite-difference schemes.

Data-driven recovery of the modified differential equation (the PDE a
discrete scheme actually solves, including its truncation error terms)
via candidate-library sparse regression with BIC model selection.
"""

from .grid import BlowUpError, Grid1D, SolutionField
from .library import CandidateLibrary, LibrarySpec, TermDescriptor, build_library, describe_term
from .oracle import AnalyticMDE, analytic_coefficients, empirical_order, mae_mre
from .pipeline import (
    ALGORITHMS,
    CASES,
    ExperimentReport,
    PipelineConfig,
    algorithm_comparison,
    prepare_ics,
    resolution_study,
    run_core,
    run_site,
)
from .precondition import compute_vif, puffer_transform, rms_vif, scale_columns
from .regress import SparseModel, foba, lasso, ols, ridge, sr3, stridge
from .selection import bic_score, optimal_choice, select_best
from .solvers import dt_from_cfl, mms_convergence, run_simulation
from .splines import PeriodicSpline, SwarmConfig, gauss_ic, optimize_ic

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "CASES", "AnalyticMDE", "BlowUpError", "CandidateLibrary",
    "ExperimentReport", "Grid1D", "LibrarySpec", "PeriodicSpline",
    "PipelineConfig", "SolutionField", "SparseModel", "SwarmConfig",
    "TermDescriptor", "algorithm_comparison", "analytic_coefficients",
    "bic_score", "build_library", "compute_vif", "describe_term",
    "dt_from_cfl", "empirical_order", "foba", "gauss_ic", "lasso",
    "mae_mre", "mms_convergence", "ols", "optimal_choice", "optimize_ic",
    "prepare_ics", "puffer_transform", "resolution_study", "ridge",
    "rms_vif", "run_core", "run_simulation", "run_site", "scale_columns",
    "select_best", "sr3", "stridge",
]
