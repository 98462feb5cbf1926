"""Simulation and verification toolkit for delayed Lohe Hermitian sphere aggregation."""

from .diagnostics import (
    DiagnosticsSeries,
    compute_series,
    diameter,
    gram_defect,
    lyapunov,
    modified_diameter,
    order_parameter,
    tail_sup,
)
from .estimator import LoheSphereSimulator
from .harness import RunConfig, SweepConfig, compare_reduction, compare_splitting, run, sweep
from .integrate import (
    ConfigError,
    DriftError,
    History,
    IntegratorConfig,
    Trajectory,
    convergence_order,
    dense_eval,
    integrate,
    solve_dde,
)
from .model import ModelParams, rhs, rhs_close_sl, rhs_general, rhs_kuramoto, rhs_ls_real, rhs_sl
from .sphere import Ensemble, inner, random_ensemble
from .theorems import TheoremReport, evaluate_gate
from .validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DiagnosticsSeries", "DriftError", "Ensemble", "History", "IntegratorConfig",
    "LoheSphereSimulator", "ModelParams", "RunConfig", "SweepConfig", "TheoremReport", "Trajectory",
    "ValidationError", "compare_reduction", "compare_splitting", "compute_series", "convergence_order",
    "dense_eval", "diameter", "evaluate_gate", "gram_defect", "inner", "integrate", "lyapunov",
    "modified_diameter", "order_parameter", "random_ensemble", "rhs", "rhs_close_sl", "rhs_general",
    "rhs_kuramoto", "rhs_ls_real", "rhs_sl", "run", "solve_dde", "sweep", "tail_sup",
]
