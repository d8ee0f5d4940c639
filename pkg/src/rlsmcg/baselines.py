"""Reference solvers sharing the nonmonotone line search and accounting machinery.

Three classics for comparison runs: Hestenes-Stiefel conjugate gradients,
limited-memory BFGS (two-loop recursion), and Barzilai-Borwein steepest
descent.  They use the same evaluation-counting wrapper, the same
nonmonotone Wolfe search, and the same termination protocol as the main
solver, so reported counters are directly comparable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from .core import (CountingProblem, Problem, RunReport, SolverParams, Status,
                   Vector, dot, norm_inf)
from .linesearch import (AcceptKind, LineFunction, NonmonotoneLedger,
                         bb_fallback_stepsize, bb_stepsizes, clip_step,
                         ledger_update, quad_interp_min, wolfe_search)


class BaselineTag(Enum):
    HS_CG = "hs"
    LBFGS = "lbfgs"
    BB_SD = "bbsd"


@dataclass(frozen=True)
class BaselineKind:
    tag: BaselineTag
    memory: int = 11

    def __post_init__(self):
        if self.tag is BaselineTag.LBFGS and self.memory < 1:
            raise ValueError("L-BFGS memory must be >= 1")


# pairs with s'y below this times ||s|| ||y|| are skipped (curvature too weak)
LBFGS_SKIP = 1e-10


def lbfgs_two_loop(g: Vector, s_list: List[Vector], y_list: List[Vector]) -> Vector:
    """Standard two-loop recursion; newest pair first in both lists.

    The seed matrix is (s'y / y'y) I from the newest pair, the usual scaling.
    """
    q = np.array(g, dtype=float)
    if not s_list:
        return -q
    rho = [1.0 / dot(s, y) for s, y in zip(s_list, y_list)]
    alpha = []
    for r, s, y in zip(rho, s_list, y_list):
        a = r * dot(s, q)
        alpha.append(a)
        q = q - a * y
    s0, y0 = s_list[0], y_list[0]
    q = (dot(s0, y0) / dot(y0, y0)) * q
    for r, s, y, a in zip(reversed(rho), reversed(s_list), reversed(y_list),
                          reversed(alpha)):
        b = r * dot(y, q)
        q = q + (a - b) * s
    return -q


def run_baseline(kind: BaselineKind, problem: Problem,
                 params: Optional[SolverParams] = None,
                 trace_hook: Optional[Callable] = None) -> RunReport:
    """Minimize with the chosen baseline under the shared protocol."""
    p = (params if params is not None else SolverParams()).resolve(problem.dim)
    cp = CountingProblem(problem)
    t_start = time.perf_counter()
    x = problem.x0.copy()
    f = cp.f(x)
    g = cp.g(x)
    if not (math.isfinite(f) and bool(np.all(np.isfinite(g)))):
        return RunReport(0, cp.n_f, cp.n_g, time.perf_counter() - t_start,
                         Status.NUMERIC_FAIL, math.nan, x=x, f=f)

    ledger = NonmonotoneLedger.start(f)
    s_prev: Optional[Vector] = None
    y_prev: Optional[Vector] = None
    d_prev: Optional[Vector] = None
    s_mem: List[Vector] = []
    y_mem: List[Vector] = []
    k = 0
    strikes = 0
    status: Optional[Status] = None

    while True:
        gni = norm_inf(g)
        if gni <= p.grad_tol:
            status = Status.CONVERGED
            break
        if k >= p.max_iter:
            status = Status.ITER_CAP
            break

        d, alpha0 = _direction_and_step(kind, k, x, f, g, s_prev, y_prev,
                                        d_prev, s_mem, y_mem, p)
        gTd = dot(g, d)
        if gTd >= 0.0 or not np.all(np.isfinite(d)):
            d = -g
            gTd = -dot(g, g)
            alpha0 = bb_fallback_stepsize(g, s_prev, y_prev, p)

        line = LineFunction(cp, x, d, f0=f, g0=g)
        if alpha0 is None:
            # conjugate-gradient step: aim the trial at the interpolated
            # 1-D minimizer (exact on quadratics), fall back to the BB scale
            phi1 = line.value(1.0)
            cand = quad_interp_min(f, gTd, phi1, 1.0) if math.isfinite(phi1) else None
            if cand is not None and cand > 0.0:
                alpha0 = clip_step(cand, p)
            else:
                alpha0 = bb_fallback_stepsize(g, s_prev, y_prev, p)
        result = wolfe_search(line, alpha0, ledger, gTd, 1.0, p)
        if result.accepted_by is AcceptKind.MAX_BACKTRACK:
            strikes += 1
            if strikes >= 2 or result.alpha is None:
                d = -g
                gTd = -dot(g, g)
                line = LineFunction(cp, x, d, f0=f, g0=g)
                result = wolfe_search(line, bb_fallback_stepsize(g, s_prev, y_prev, p),
                                      ledger, gTd, 1.0, p)
                if result.accepted_by is not AcceptKind.WOLFE:
                    status = Status.LINESEARCH_FAIL
                    break
                strikes = 0
        else:
            strikes = 0

        alpha = result.alpha
        x_next = line.point(alpha)
        f_next = result.f_trial
        g_next = result.g_trial
        if not (math.isfinite(f_next) and bool(np.all(np.isfinite(g_next)))):
            status = Status.NUMERIC_FAIL
            break

        s_prev = x_next - x
        y_prev = g_next - g
        d_prev = d
        if kind.tag is BaselineTag.LBFGS:
            sTy = dot(s_prev, y_prev)
            if sTy > LBFGS_SKIP * np.linalg.norm(s_prev) * np.linalg.norm(y_prev):
                s_mem.insert(0, s_prev)
                y_mem.insert(0, y_prev)
                del s_mem[kind.memory:], y_mem[kind.memory:]
        ledger = ledger_update(ledger, f_next)
        x, f, g = x_next, f_next, g_next
        k += 1
        if trace_hook is not None:
            trace_hook({"k": k - 1, "case": kind.tag.value, "alpha": alpha,
                        "gnorm_inf": norm_inf(g), "Ck": ledger.Ck,
                        "state": "-", "mu": 0.0})
        if norm_inf(g) <= p.grad_tol:
            status = Status.CONVERGED
            break

    return RunReport(n_iter=k, n_f=cp.n_f, n_g=cp.n_g,
                     wall_time=time.perf_counter() - t_start, status=status,
                     final_gnorm_inf=norm_inf(g), x=x, f=f)


def _direction_and_step(kind, k, x, f, g, s_prev, y_prev, d_prev, s_mem, y_mem,
                        p: SolverParams):
    if kind.tag is BaselineTag.HS_CG:
        if k == 0 or d_prev is None:
            return -g, bb_fallback_stepsize(g, s_prev, y_prev, p)
        dTy = dot(d_prev, y_prev)
        if dTy == 0.0:
            return -g, bb_fallback_stepsize(g, s_prev, y_prev, p)
        beta = dot(g, y_prev) / dTy
        return -g + beta * d_prev, None  # interpolated trial, filled by caller
    if kind.tag is BaselineTag.LBFGS:
        d = lbfgs_two_loop(g, s_mem, y_mem)
        return d, 1.0 if s_mem else bb_fallback_stepsize(g, s_prev, y_prev, p)
    if kind.tag is BaselineTag.BB_SD:
        if s_prev is None or dot(s_prev, y_prev) <= 0.0:
            return -g, bb_fallback_stepsize(g, s_prev, y_prev, p)
        bb1, bb2 = bb_stepsizes(s_prev, y_prev)
        return -g, clip_step(bb1 if k % 2 == 1 else bb2, p)
    raise ValueError(f"unknown baseline {kind.tag}")
