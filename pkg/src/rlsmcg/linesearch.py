"""Initial stepsize selection and the generalized nonmonotone Wolfe search.

The sufficient-decrease test is measured against a weighted reference value
C_k (a convex combination of past objective values) instead of f_k, which
permits controlled nonmonotonicity; the curvature side is the usual one-sided
Wolfe condition.  Initial trial steps come from quadratic interpolation and
the two Barzilai-Borwein scalars, chosen per direction type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import SolverParams, Vector, dot, norm_inf


class AcceptKind(Enum):
    WOLFE = "wolfe"
    MAX_BACKTRACK = "max_backtrack"


@dataclass(frozen=True)
class NonmonotoneLedger:
    """Reference value C_k, accumulated weight Q_k, and the control used last."""

    Ck: float
    Qk: float
    eta_k: float
    k: int

    @classmethod
    def start(cls, f0: float) -> "NonmonotoneLedger":
        return cls(Ck=f0, Qk=1.0, eta_k=0.9, k=0)


@dataclass
class StepResult:
    """Outcome of one line search."""

    alpha: Optional[float]
    f_trial: Optional[float]
    g_trial: Optional[Vector]
    n_f_used: int
    n_g_used: int
    accepted_by: AcceptKind
    slope_trial: Optional[float] = None


class LineFunction:
    """The 1-D restriction phi(a) = f(x + a d) with cached, counted evaluations.

    Seeding the a = 0 slot with the already-known (f, g) keeps the evaluation
    accounting honest: phi(0) and phi'(0) never re-evaluate.
    """

    def __init__(self, problem, x: Vector, d: Vector,
                 f0: Optional[float] = None, g0: Optional[Vector] = None):
        self.problem = problem
        self.x = np.asarray(x, dtype=float)
        self.d = np.asarray(d, dtype=float)
        self.n_f_evals = 0
        self.n_g_evals = 0
        self._f_cache = {}
        self._g_cache = {}
        if f0 is not None:
            self._f_cache[0.0] = float(f0)
        if g0 is not None:
            self._g_cache[0.0] = np.asarray(g0, dtype=float)

    def point(self, a: float) -> Vector:
        return self.x + a * self.d

    def value(self, a: float) -> float:
        a = float(a)
        if a not in self._f_cache:
            self._f_cache[a] = self.problem.f(self.point(a))
            self.n_f_evals += 1
        return self._f_cache[a]

    def gradient(self, a: float) -> Vector:
        a = float(a)
        if a not in self._g_cache:
            self._g_cache[a] = self.problem.g(self.point(a))
            self.n_g_evals += 1
        return self._g_cache[a]

    def slope(self, a: float) -> float:
        return float(np.dot(self.gradient(a), self.d))


def quad_interp_min(phi0: float, dphi0: float, phi_a: float, a: float) -> Optional[float]:
    """Minimizer of the quadratic through (0, phi0) with slope dphi0 and value phi_a at a.

    Returns None for a concave or linear fit (no interior minimizer).
    """
    denom = 2.0 * (phi_a - phi0 - dphi0 * a)
    if denom <= 0.0 or not math.isfinite(denom):
        return None
    return -dphi0 * a * a / denom


def bb_stepsizes(s: Vector, y: Vector) -> tuple:
    """The two Barzilai-Borwein scalars (s's/s'y, s'y/y'y); requires s'y > 0."""
    sTy = dot(s, y)
    if sTy <= 0.0:
        raise ValueError("BB stepsizes require s'y > 0")
    return dot(s, s) / sTy, sTy / dot(y, y)


def clip_step(alpha: float, params: SolverParams) -> float:
    return max(min(alpha, params.alpha_max), params.alpha_min)


def bb_fallback_stepsize(g: Vector, s_prev: Optional[Vector],
                         y_prev: Optional[Vector], params: SolverParams) -> float:
    """Default trial step: clipped BB2 when g's_prev > 0, else clipped BB1.

    Before the first pair exists the guess is 1/||g||_inf; a nonpositive s'y
    degrades to alpha_min.
    """
    if s_prev is None or y_prev is None:
        gni = norm_inf(g)
        return clip_step(1.0 / gni if gni > 0.0 else 1.0, params)
    if dot(s_prev, y_prev) <= 0.0:
        return params.alpha_min
    bb1, bb2 = bb_stepsizes(s_prev, y_prev)
    return clip_step(bb2 if dot(g, s_prev) > 0.0 else bb1, params)


# --- nonmonotone ledger -----------------------------------------------------

def _eta_rule(Ck: float, f_next: float, k: int) -> float:
    """Nonmonotonicity control: lock to 1 only on a >95% reduction late in the run."""
    if Ck - f_next > 0.95 * abs(Ck) and k > 100:
        return 1.0
    return 0.9


def q_next(ledger: NonmonotoneLedger, f_next: float) -> float:
    """Weight Q_{k+1} entering the sufficient-decrease test (2.0 at the first step)."""
    if ledger.k == 0:
        return 2.0
    return _eta_rule(ledger.Ck, f_next, ledger.k) * ledger.Qk + 1.0


def ledger_update(ledger: NonmonotoneLedger, f_next: float,
                  special_k1: bool = True) -> NonmonotoneLedger:
    """Advance (C_k, Q_k) after accepting f_{k+1}.

    The first update uses the fixed pair Q_1 = 2.0, C_1 = min(C_0, f_1 + 1.0);
    afterwards C is the eta-weighted running combination.  ``special_k1=False``
    applies the generic rule from the start (then C_k is a strict convex
    combination of all past values).
    """
    if ledger.k == 0 and special_k1:
        return NonmonotoneLedger(Ck=min(ledger.Ck, f_next + 1.0), Qk=2.0,
                                 eta_k=1.0, k=1)
    eta = _eta_rule(ledger.Ck, f_next, ledger.k)
    Qn = eta * ledger.Qk + 1.0
    Cn = (eta * ledger.Qk * ledger.Ck + f_next) / Qn
    return NonmonotoneLedger(Ck=Cn, Qk=Qn, eta_k=eta, k=ledger.k + 1)


def sufficient_decrease_ok(f_new: float, ledger: NonmonotoneLedger, eta_bar: float,
                           alpha: float, gTd: float, params: SolverParams) -> bool:
    """f(x + eta*a*d) <= C_k + Q_{k+1} delta_k eta a g'd, with Q_{k+1} self-consistent.

    Under the Zhang-Hager override (delta_k = zh/Q_{k+1}) the weight cancels
    and the test is applied in its reduced form.
    """
    if not math.isfinite(f_new):
        return False
    if params.zh_delta is not None:
        return f_new <= ledger.Ck + params.zh_delta * eta_bar * alpha * gTd
    Qn = q_next(ledger, f_new)
    return f_new <= ledger.Ck + Qn * params.delta_k * eta_bar * alpha * gTd


def curvature_ok(slope_new: float, gTd: float, params: SolverParams) -> bool:
    return slope_new >= params.sigma_wolfe * gTd


# --- initial stepsize -------------------------------------------------------

def initial_stepsize(line: LineFunction, params: SolverParams, *,
                     kind: str, gTd: float, gnorm2: float, quad_like: bool,
                     bb_fallback: float, prev_was_neg_grad: bool) -> float:
    """Trial step for the line search, chosen per direction type.

    kind = "interp":       model-based directions (subspace solves, HS, and the
                           quasi-Newton step with a shaped reduced Hessian);
                           interpolate through phi(1), unit fallback.
    kind = "rqn_identity": quasi-Newton step while the reduced Hessian is the
                           identity; interpolate through phi(1), BB fallback.
    kind = "neg_grad":     steepest descent; interpolate through phi(bb) under
                           a conservative gate, BB fallback.
    """
    phi0 = line.value(0.0)
    if kind in ("interp", "rqn_identity"):
        phi1 = line.value(1.0)
        fallback = 1.0 if kind == "interp" else bb_fallback
        if not math.isfinite(phi1):
            return fallback
        alpha_bar = quad_interp_min(phi0, gTd, phi1, 1.0)
        denom = params.tau1 + phi0
        varpi = abs(phi1 - phi0) / denom if denom != 0.0 else math.inf
        if (quad_like or varpi <= params.tau2) and alpha_bar is not None and alpha_bar > 0.0:
            return clip_step(alpha_bar, params)
        return fallback
    if kind == "neg_grad":
        if quad_like and gnorm2 <= 1.0 and not prev_was_neg_grad:
            phi_a = line.value(bb_fallback)
            if math.isfinite(phi_a):
                att = quad_interp_min(phi0, gTd, phi_a, bb_fallback)
                if att is not None and att > 0.0:
                    return clip_step(att, params)
        return bb_fallback
    raise ValueError(f"unknown initial-stepsize kind {kind!r}")


# --- the search itself ------------------------------------------------------

GROW = 5.0
MAX_ROUNDS = 50


def wolfe_search(line: LineFunction, alpha0: float, ledger: NonmonotoneLedger,
                 gTd: float, eta_bar: float, params: SolverParams) -> StepResult:
    """Bracket-and-interpolate search for the nonmonotone Wolfe conditions.

    A failed decrease test shrinks the bracket; a failed curvature test
    (slope still steeply negative) expands it.  Gradients are evaluated only
    at points that already pass the decrease test.  If no acceptable point is
    found in MAX_ROUNDS rounds, the best trial that at least stayed below C_k
    is returned, flagged MAX_BACKTRACK (alpha None when not even that exists).
    """
    if gTd >= 0.0:
        raise ValueError("wolfe_search requires a descent direction (g'd < 0)")
    if alpha0 <= 0.0:
        raise ValueError("wolfe_search requires alpha0 > 0")
    nf0 = line.n_f_evals
    ng0 = line.n_g_evals

    lo, phi_lo, slope_lo = 0.0, line.value(0.0), gTd
    hi, phi_hi = None, None
    alpha = alpha0
    best_alpha, best_phi = None, math.inf

    for _ in range(MAX_ROUNDS):
        phi_a = line.value(eta_bar * alpha)
        if math.isfinite(phi_a) and phi_a <= ledger.Ck and phi_a < best_phi:
            best_alpha, best_phi = alpha, phi_a
        if sufficient_decrease_ok(phi_a, ledger, eta_bar, alpha, gTd, params):
            slope_a = line.slope(eta_bar * alpha)
            if math.isfinite(slope_a) and curvature_ok(slope_a, gTd, params):
                return StepResult(alpha=alpha, f_trial=phi_a,
                                  g_trial=line.gradient(eta_bar * alpha),
                                  n_f_used=line.n_f_evals - nf0,
                                  n_g_used=line.n_g_evals - ng0,
                                  accepted_by=AcceptKind.WOLFE,
                                  slope_trial=slope_a)
            # decrease fine but still descending steeply: move right
            lo, phi_lo, slope_lo = alpha, phi_a, slope_a
        else:
            hi, phi_hi = alpha, phi_a

        if hi is None:
            alpha = GROW * alpha
        else:
            span = hi - lo
            if span <= 1e-12 * max(hi, 1.0):
                break  # bracket collapsed; nothing acceptable in it
            cand = None
            if math.isfinite(phi_hi):
                t = quad_interp_min(phi_lo, slope_lo, phi_hi, span)
                if t is not None:
                    cand = lo + t
            if cand is None or not (lo + 0.1 * span <= cand <= lo + 0.9 * span):
                cand = lo + 0.5 * span
            alpha = cand

    if best_alpha is None:
        return StepResult(alpha=None, f_trial=None, g_trial=None,
                          n_f_used=line.n_f_evals - nf0,
                          n_g_used=line.n_g_evals - ng0,
                          accepted_by=AcceptKind.MAX_BACKTRACK)
    return StepResult(alpha=best_alpha, f_trial=line.value(eta_bar * best_alpha),
                      g_trial=line.gradient(eta_bar * best_alpha),
                      n_f_used=line.n_f_evals - nf0,
                      n_g_used=line.n_g_evals - ng0,
                      accepted_by=AcceptKind.MAX_BACKTRACK,
                      slope_trial=line.slope(eta_bar * best_alpha))
