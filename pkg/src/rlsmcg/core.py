"""Shared primitives: problem abstraction, parameter ledger, run state and reports.

Everything downstream (direction selection, line search, the driver, the
baselines and the bench harness) builds on the types defined here.  A
``Problem`` is a pure (f, g) evaluator pair; evaluation counting happens in
``CountingProblem`` so no code path can evade accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray


class NumericError(RuntimeError):
    """A computation produced non-finite values."""


class EmptySubspaceError(ValueError):
    """Every candidate basis column was dropped as numerically dependent."""


class Status(Enum):
    CONVERGED = "converged"
    ITER_CAP = "iter_cap"
    LINESEARCH_FAIL = "linesearch_fail"
    NUMERIC_FAIL = "numeric_fail"


class IterType(Enum):
    SMCG = "SMCG"
    RQN = "RQN"


class CaseTag(Enum):
    """Which branch of the direction selection produced a step."""

    REG_SUBPROBLEM = "reg_subproblem"
    QUAD_SUBPROBLEM = "quad_subproblem"
    HS = "hs"
    NEG_GRAD = "neg_grad"
    RQN = "rqn"


def dot(a: Vector, b: Vector) -> float:
    """Euclidean inner product of two equal-length vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def norm_inf(v: Vector) -> float:
    """Max-norm of a nonempty vector."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("norm_inf of empty vector")
    return float(np.max(np.abs(v)))


@dataclass(frozen=True)
class Problem:
    """Smooth unconstrained objective with exact gradient and standard start.

    Attributes:
        name: identifier, e.g. ``"quad_hilbert(8)"``.
        dim: number of variables, ``n >= 1``.
        eval_f: maps a point in R^n to the objective value.
        eval_g: maps a point in R^n to the exact gradient.
        x0: standard starting point (length ``dim``).
    """

    name: str
    dim: int
    eval_f: Callable[[Vector], float]
    eval_g: Callable[[Vector], Vector]
    x0: Vector

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.dim,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({self.dim},)")
        object.__setattr__(self, "x0", x0)


class CountingProblem:
    """Evaluation-counting wrapper around a Problem.

    All solvers evaluate f and g only through this wrapper, so the reported
    N_f / N_g are exact by construction.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.n_f = 0
        self.n_g = 0

    @property
    def dim(self) -> int:
        return self.problem.dim

    def f(self, x: Vector) -> float:
        self.n_f += 1
        return float(self.problem.eval_f(x))

    def g(self, x: Vector) -> Vector:
        self.n_g += 1
        return np.asarray(self.problem.eval_g(x), dtype=float)


def finite_diff_gradient(problem: Problem, x: Vector) -> Vector:
    """Central-difference gradient with per-coordinate step 1e-6 * (1 + |x_i|).

    Used as an independent oracle against ``eval_g``.  Raises NumericError if
    any function evaluation is non-finite.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = 1e-6 * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = problem.eval_f(xp)
        fm = problem.eval_f(xm)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NumericError(f"non-finite f while differencing coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class SolverParams:
    """Every tunable of the solver, with protocol defaults.

    ``memory_m``, ``varsigma`` and ``l_reset`` depend on the problem dimension
    (memory is capped at min(n, 11)); leave them ``None`` and call
    :meth:`resolve` with the dimension to obtain a fully concrete instance.
    """

    # direction-selection thresholds
    xi1: float = 1e-10
    xi2: float = 1.2e4
    xi3: float = 5e-5
    xi4: float = 1e-4
    xi5: float = 0.08
    # orthogonality enter/exit thresholds
    eta0_tilde: float = 1e-9
    eta1_tilde: float = 0.5
    # subspace quasi-Newton controls
    upsilon: float = 5e-7
    memory_m: Optional[int] = None          # min(n, 11) when resolved
    sigma1: float = 0.1
    sigma2: float = 5.0
    sigma3: float = 0.85
    mu_min: float = 1e-6
    mu_max: float = 1.0
    l_reset: Optional[int] = None           # max(memory_m**2, 20) when resolved
    # acceleration constants
    tau_hat: float = 1.0
    tau_bar: float = 0.225
    c_bar: float = 0.1
    varsigma: Optional[float] = None        # 5e-5 if n <= 11 else 5e-6
    varsigma_bar: float = 5e-3
    eps_bar: float = 1e-10
    # initial-stepsize controls
    tau1: float = 0.1
    tau2: float = 135.0
    alpha_min: float = 1e-8
    alpha_max: float = 1e8
    # line-search coefficients
    delta_k: float = 0.0005
    delta_min: float = 1e-6
    delta_max: float = 0.9
    sigma_wolfe: float = 0.9999
    # when set, the sufficient-decrease coefficient becomes
    # zh_delta / Q_{k+1} per iteration (the Zhang-Hager reduction)
    zh_delta: Optional[float] = None
    # termination / restart
    grad_tol: float = 1e-6
    max_iter: int = 200_000
    min_quad: int = 50

    def __post_init__(self):
        def require(cond, msg):
            if not cond:
                raise ValueError(f"SolverParams: {msg}")

        for name in ("xi1", "xi2", "xi3", "xi5"):
            require(getattr(self, name) > 0, f"{name} must be positive")
        require(self.xi4 > 0 and self.xi4 < self.xi5, "need 0 < xi4 < xi5")
        require(0 < self.eta0_tilde < self.eta1_tilde < 1,
                "need 0 < eta0_tilde < eta1_tilde < 1")
        require(self.upsilon > 0, "upsilon must be positive")
        if self.memory_m is not None:
            require(self.memory_m >= 1, "memory_m must be >= 1")
        require(0 < self.sigma1 <= 1, "sigma1 must be in (0, 1]")
        require(self.sigma2 > 1, "sigma2 must be > 1")
        require(0 < self.sigma3 <= 1, "sigma3 must be in (0, 1]")
        require(0 < self.mu_min <= self.mu_max, "need 0 < mu_min <= mu_max")
        if self.l_reset is not None:
            require(self.l_reset >= 1, "l_reset must be >= 1")
        for name in ("tau_hat", "tau_bar", "c_bar", "varsigma_bar", "eps_bar",
                     "tau1", "tau2"):
            require(getattr(self, name) > 0, f"{name} must be positive")
        if self.varsigma is not None:
            require(self.varsigma > 0, "varsigma must be positive")
        require(0 < self.alpha_min < self.alpha_max,
                "need 0 < alpha_min < alpha_max")
        require(0 < self.delta_min < self.delta_k < self.delta_max < 1,
                "need 0 < delta_min < delta_k < delta_max < 1")
        if self.zh_delta is not None:
            require(0 < self.zh_delta < 1, "zh_delta must be in (0, 1)")
        require(0 < self.sigma_wolfe < 1, "sigma_wolfe must be in (0, 1)")
        require(self.grad_tol > 0, "grad_tol must be positive")
        require(self.max_iter >= 1, "max_iter must be >= 1")
        require(self.min_quad >= 1, "min_quad must be >= 1")

    def resolve(self, dim: int) -> "SolverParams":
        """Concrete parameters for a problem of the given dimension."""
        m = self.memory_m if self.memory_m is not None else min(dim, 11)
        m = min(m, dim)
        lr = self.l_reset if self.l_reset is not None else max(m * m, 20)
        vs = self.varsigma
        if vs is None:
            vs = 5e-5 if dim <= 11 else 5e-6
        return replace(self, memory_m=m, l_reset=lr, varsigma=vs)


@dataclass
class DirectionRecord:
    """A chosen search direction plus the branch that produced it.

    Producers guarantee gTd < 0 (sufficient descent is enforced with a
    steepest-descent fallback in the direction routines).
    """

    d: Vector
    case_tag: CaseTag
    gTd: float


@dataclass
class RunReport:
    """Outcome of a single solver run."""

    n_iter: int
    n_f: int
    n_g: int
    wall_time: float
    status: Status
    final_gnorm_inf: float
    x: Optional[Vector] = None
    f: Optional[float] = None

    def __post_init__(self):
        if self.status is Status.CONVERGED and not math.isnan(self.final_gnorm_inf):
            # cheap self-check; the grad_tol itself lives in SolverParams
            assert self.final_gnorm_inf >= 0.0


@dataclass
class SolverState:
    """Mutable per-run state; confined to one run and advanced only by the driver."""

    k: int
    x: Vector
    f: float
    g: Vector
    # previous accepted step and its gradient difference
    s_prev: Optional[Vector] = None
    y_prev: Optional[Vector] = None
    f_prev: Optional[float] = None
    # quadratic-closeness bookkeeping (inf = no usable sample yet)
    t_prev: float = math.inf
    # nonmonotone reference value and weight
    Ck: float = 0.0
    Qk: float = 1.0
    state_flag: IterType = IterType.SMCG
    iter_restart: int = 0
    iter_quad: int = 0
    # ring buffer of the last memory_m search directions, newest first
    dir_history: list = field(default_factory=list)
    prev_case: Optional[CaseTag] = None
    # subspace quasi-Newton phase (None while in SMCG state)
    subspace: Optional[object] = None
    bhat: Optional[object] = None
    mu: float = 0.0
    rqn_phase_iter: int = 0
    # consecutive line-search fallbacks, for the failure escalation rule
    backtrack_strikes: int = 0
