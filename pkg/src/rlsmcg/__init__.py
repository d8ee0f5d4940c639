"""Regularized limited-memory subspace-minimization conjugate gradient solver.

Public surface: the solver driver (:func:`run`), the problem suite
(:func:`registry`, :func:`get_problem`), the baselines
(:func:`run_baseline`), and the bench harness (:mod:`rlsmcg.bench`).
"""

from .core import (CaseTag, CountingProblem, DirectionRecord, IterType,
                   NumericError, Problem, RunReport, SolverParams, SolverState,
                   Status, dot, finite_diff_gradient, norm_inf)
from .baselines import BaselineKind, BaselineTag, run_baseline
from .problems import ProblemSpec, get_problem, registry, verify_gradients
from .solver import TraceRecord, run, run_with_trace

__all__ = [
    "BaselineKind", "BaselineTag", "CaseTag", "CountingProblem",
    "DirectionRecord", "IterType", "NumericError", "Problem", "ProblemSpec",
    "RunReport", "SolverParams", "SolverState", "Status", "TraceRecord",
    "dot", "finite_diff_gradient", "get_problem", "norm_inf", "registry",
    "run", "run_baseline", "run_with_trace", "verify_gradients",
]

__version__ = "0.1.0"
