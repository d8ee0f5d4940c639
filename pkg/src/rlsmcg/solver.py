"""Driver: the two-state iteration loop with restart bookkeeping and termination.

Each iteration runs direction selection (per the current state flag), initial
stepsize, the nonmonotone Wolfe search, an optional trial-point termination
check, the acceleration gate, restart-counter and reference-value updates,
and finally the state-flag transition driven by the orthogonality predicates.
A per-iteration trace hook exposes everything the bench harness and the
verification suites need.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import smcg_direction as smcg
from . import subspace_rqn as rqn
from .acceleration import TrialPoint, accel_criterion, apply_acceleration
from .core import (CaseTag, CountingProblem, DirectionRecord, EmptySubspaceError,
                   IterType, NumericError, Problem, RunReport, SolverParams,
                   SolverState, Status, Vector, dot, norm_inf)
from .linesearch import (AcceptKind, LineFunction, NonmonotoneLedger,
                         bb_fallback_stepsize, bb_stepsizes, clip_step,
                         initial_stepsize, ledger_update, wolfe_search)


@dataclass(frozen=True)
class RestartCounters:
    """Iterations since the last restart, and the length of the current quad-like run."""

    iter_restart: int = 0
    iter_quad: int = 0
    min_quad: int = 50


def update_restart_counters(counters: RestartCounters, t_k: float,
                            restarted: bool, params: SolverParams) -> RestartCounters:
    """Advance the counters; a forced restart zeroes both."""
    if restarted:
        return RestartCounters(0, 0, counters.min_quad)
    iq = counters.iter_quad + 1 if t_k <= params.xi4 else 0
    return RestartCounters(counters.iter_restart + 1, iq, counters.min_quad)


@dataclass
class TraceRecord:
    """Everything observable about one iteration."""

    k: int
    case_tag: CaseTag
    alpha: float
    eta_bar: float
    gnorm_inf: float          # of the new gradient
    Ck: float                 # reference value after the update
    state: IterType           # state flag after the transition
    state_before: IterType    # state flag the iteration ran under
    mu: float
    # diagnostics for the property suites
    gTd: float
    gnorm2: float             # ||g_k||^2 at direction time
    dnorm: float
    f: float                  # f_{k+1}
    f_before: float           # f_k
    Ck_before: float
    t_k: float
    accepted_by: AcceptKind
    accel_attempted: bool
    accel_accepted: bool
    entered_rqn: bool
    exited_rqn: bool
    orth_lost_flag: Optional[bool]
    bhat: Optional[np.ndarray]
    rescued: bool
    guard_fallback: bool
    early_converged: bool
    failure: Optional[Status]


TraceHook = Callable[[TraceRecord], None]


def _neg_grad_record(g: Vector) -> DirectionRecord:
    return DirectionRecord(d=-g, case_tag=CaseTag.NEG_GRAD, gTd=-dot(g, g))


def _rescue_stepsize(state: SolverState, params: SolverParams) -> float:
    if state.s_prev is not None and dot(state.s_prev, state.y_prev) > 0.0:
        bb1, _ = bb_stepsizes(state.s_prev, state.y_prev)
        return clip_step(bb1, params)
    gni = norm_inf(state.g)
    return clip_step(1.0 / gni if gni > 0.0 else 1.0, params)


def step(state: SolverState, cp: CountingProblem, params: SolverParams, *,
         rqn_enabled: bool = True, collect_bhat: bool = False) -> TraceRecord:
    """One full iteration; mutates ``state`` and reports what happened.

    Raises NumericError only when the reduced quasi-Newton solve fails twice;
    all other numeric trouble is reported through the ``failure`` field.
    """
    x, f, g = state.x, state.f, state.g
    state_before = state.state_flag
    gnorm2 = dot(g, g)
    t_k = smcg.closeness_from_state(state)
    quad_like = smcg.is_quadratic_like(t_k, state.t_prev, params)
    c1 = smcg.sufficient_descent_coefficient(params)

    # --- Step 2: direction ---------------------------------------------
    restarted = False
    guard_fallback = False
    if state.state_flag is IterType.SMCG:
        if state.k == 0:
            record = _neg_grad_record(g)
        elif state.iter_quad == params.min_quad and state.iter_quad != state.iter_restart:
            record = _neg_grad_record(g)
            restarted = True
        else:
            record = smcg.smcg_direction(state, params, t_k)
    else:
        record = rqn.rqn_direction(state.subspace, state.bhat, g)
        if (not np.all(np.isfinite(record.d))) or record.gTd > -c1 * gnorm2:
            # degenerate reduced step: restart with -g and leave the phase
            record = _neg_grad_record(g)
            guard_fallback = True

    # --- Step 3: initial stepsize ---------------------------------------
    line = LineFunction(cp, x, record.d, f0=f, g0=g)
    bb = bb_fallback_stepsize(g, state.s_prev, state.y_prev, params)
    if record.case_tag is CaseTag.RQN:
        kind = "rqn_identity" if state.bhat.is_identity else "interp"
    elif record.case_tag is CaseTag.NEG_GRAD:
        kind = "neg_grad"
    else:
        kind = "interp"
    prev_was_neg_grad = state.prev_case is None or state.prev_case is CaseTag.NEG_GRAD
    alpha0 = initial_stepsize(line, params, kind=kind, gTd=record.gTd,
                              gnorm2=gnorm2, quad_like=quad_like,
                              bb_fallback=bb, prev_was_neg_grad=prev_was_neg_grad)

    # --- Step 4: line search (plus the one-shot rescue path) -------------
    ledger = NonmonotoneLedger(Ck=state.Ck, Qk=state.Qk, eta_k=0.9, k=state.k)
    result = wolfe_search(line, alpha0, ledger, record.gTd, 1.0, params)
    rescued = False
    if result.accepted_by is AcceptKind.MAX_BACKTRACK:
        state.backtrack_strikes += 1
        if state.backtrack_strikes >= 2 or result.alpha is None:
            record = _neg_grad_record(g)
            guard_fallback = guard_fallback or state.state_flag is IterType.RQN
            line = LineFunction(cp, x, record.d, f0=f, g0=g)
            result = wolfe_search(line, _rescue_stepsize(state, params), ledger,
                                  record.gTd, 1.0, params)
            rescued = True
            if result.accepted_by is not AcceptKind.WOLFE:
                return _failed(state, record, t_k, gnorm2, Status.LINESEARCH_FAIL,
                               rescued=True)
            state.backtrack_strikes = 0
    else:
        state.backtrack_strikes = 0

    alpha = result.alpha
    f_z = result.f_trial
    g_z = result.g_trial
    z = line.point(alpha)

    # --- Step 5: trial-point termination check ---------------------------
    gz_inf = norm_inf(g_z)
    early = gz_inf <= params.grad_tol

    # --- Steps 6/7: acceleration or plain update -------------------------
    trial = TrialPoint(z=z, f_z=f_z, g_z=g_z, alpha=alpha, d=record.d)
    accel_attempted = False
    accel_accepted = False
    eta_bar = 1.0
    if not early and accel_criterion(f, gnorm2, record.gTd, trial, params):
        accel_attempted = True
        res = apply_acceleration(cp, x, f, record.gTd, trial, ledger, params)
        x_next, f_next, g_next = res.x_next, res.f_next, res.g_next
        eta_bar = res.eta_bar
        accel_accepted = res.accepted
    else:
        x_next, f_next, g_next = z, f_z, g_z

    if not (math.isfinite(f_next) and bool(np.all(np.isfinite(g_next)))):
        return _failed(state, record, t_k, gnorm2, Status.NUMERIC_FAIL,
                       rescued=rescued)

    # --- Step 8: restart counters ----------------------------------------
    rc = update_restart_counters(
        RestartCounters(state.iter_restart, state.iter_quad, params.min_quad),
        t_k, restarted, params)

    # --- Step 9: nonmonotone reference update -----------------------------
    new_ledger = ledger_update(ledger, f_next)

    # --- Step 10: direction history and state transition ------------------
    s_new = x_next - x
    y_new = g_next - g
    state.dir_history.insert(0, np.array(record.d, dtype=float))
    del state.dir_history[params.memory_m:]

    entered = False
    exited = False
    orth_lost_flag = None
    bhat_copy = None
    if state.state_flag is IterType.SMCG:
        if len(state.dir_history) == params.memory_m:
            fact = _try_qr(state.dir_history)
            if fact is not None:
                orth_lost_flag = rqn.orthogonality_lost(fact, g_next, params)
                if orth_lost_flag and rqn_enabled:
                    # freeze the well-conditioned core of the span for the
                    # phase; a full-rank core would make the exit predicate
                    # unsatisfiable, so only a proper subspace is entered
                    core = _try_qr(state.dir_history, rqn.ENTRY_RANK_TOL)
                    if core is not None and core.rank < cp.dim:
                        state.state_flag = IterType.RQN
                        state.subspace = core
                        state.bhat = rqn.SubspaceHessian.identity(core.rank,
                                                                  params.mu_min)
                        state.mu = params.mu_min
                        state.rqn_phase_iter = 0
                        entered = True
    else:
        if record.case_tag is CaseTag.RQN:
            Z = state.subspace.Z
            s_hat = Z.T @ s_new
            y_hat = Z.T @ y_new
            d_hat = Z.T @ record.d
            r = rqn.ratio(f, f_z, alpha, Z.T @ g, d_hat, state.bhat.B_hat)
            mu_new = rqn.update_mu(state.bhat.mu, r, dot(s_new, s_new), params)
            state.rqn_phase_iter += 1
            state.bhat = rqn.rbfgs_update(replace(state.bhat, mu=mu_new),
                                          s_hat, y_hat, state.rqn_phase_iter, params)
            state.mu = state.bhat.mu
            if collect_bhat:
                bhat_copy = state.bhat.B_hat.copy()
            # exit once the gradient is mostly orthogonal to the frozen slice
            if rqn.orthogonality_restored(state.subspace, g_next, params):
                exited = True
        else:
            # guard or rescue replaced the reduced step: abandon the phase
            exited = True
        if exited:
            state.state_flag = IterType.SMCG
            state.subspace = None
            state.bhat = None
            state.mu = 0.0
            state.rqn_phase_iter = 0

    # --- Step 11: shift ----------------------------------------------------
    state.s_prev = s_new
    state.y_prev = y_new
    state.f_prev = f
    state.t_prev = t_k
    state.x = x_next
    state.f = f_next
    state.g = g_next
    state.Ck = new_ledger.Ck
    state.Qk = new_ledger.Qk
    state.iter_restart = rc.iter_restart
    state.iter_quad = rc.iter_quad
    state.prev_case = record.case_tag
    state.k += 1

    return TraceRecord(
        k=state.k - 1, case_tag=record.case_tag, alpha=alpha, eta_bar=eta_bar,
        gnorm_inf=norm_inf(g_next), Ck=state.Ck, state=state.state_flag,
        state_before=state_before, mu=state.mu, gTd=record.gTd, gnorm2=gnorm2,
        dnorm=float(np.linalg.norm(record.d)), f=f_next, f_before=f,
        Ck_before=ledger.Ck, t_k=t_k, accepted_by=result.accepted_by,
        accel_attempted=accel_attempted, accel_accepted=accel_accepted,
        entered_rqn=entered, exited_rqn=exited, orth_lost_flag=orth_lost_flag,
        bhat=bhat_copy, rescued=rescued, guard_fallback=guard_fallback,
        early_converged=early, failure=None)


def _try_qr(dirs, drop_tol: float = rqn.DROP_TOL
            ) -> Optional[rqn.SubspaceFactorization]:
    try:
        return rqn.qr_update(dirs, drop_tol)
    except EmptySubspaceError:
        return None


def _failed(state: SolverState, record: DirectionRecord, t_k: float,
            gnorm2: float, status: Status, *, rescued: bool) -> TraceRecord:
    return TraceRecord(
        k=state.k, case_tag=record.case_tag, alpha=math.nan, eta_bar=1.0,
        gnorm_inf=norm_inf(state.g), Ck=state.Ck, state=state.state_flag,
        state_before=state.state_flag, mu=state.mu, gTd=record.gTd, gnorm2=gnorm2,
        dnorm=float(np.linalg.norm(record.d)), f=state.f, f_before=state.f,
        Ck_before=state.Ck, t_k=t_k, accepted_by=AcceptKind.MAX_BACKTRACK,
        accel_attempted=False, accel_accepted=False, entered_rqn=False,
        exited_rqn=False, orth_lost_flag=None, bhat=None, rescued=rescued,
        guard_fallback=False, early_converged=False, failure=status)


def initial_state(cp: CountingProblem) -> SolverState:
    x0 = cp.problem.x0.copy()
    f0 = cp.f(x0)
    g0 = cp.g(x0)
    return SolverState(k=0, x=x0, f=f0, g=g0, Ck=f0, Qk=1.0)


def run(problem: Problem, params: Optional[SolverParams] = None, *,
        rqn_enabled: bool = True, trace_hook: Optional[TraceHook] = None,
        collect_bhat: bool = False) -> RunReport:
    """Minimize ``problem`` to the max-norm gradient tolerance.

    ``rqn_enabled=False`` is the ablation switch: the orthogonality predicate
    is still evaluated and traced, but the quasi-Newton phase is never
    entered.
    """
    p = (params if params is not None else SolverParams()).resolve(problem.dim)
    cp = CountingProblem(problem)
    t_start = time.perf_counter()
    state = initial_state(cp)
    if not (math.isfinite(state.f) and bool(np.all(np.isfinite(state.g)))):
        return RunReport(n_iter=0, n_f=cp.n_f, n_g=cp.n_g,
                         wall_time=time.perf_counter() - t_start,
                         status=Status.NUMERIC_FAIL,
                         final_gnorm_inf=math.nan, x=state.x, f=state.f)

    status: Optional[Status] = None
    while True:
        if norm_inf(state.g) <= p.grad_tol:
            status = Status.CONVERGED
            break
        if state.k >= p.max_iter:
            status = Status.ITER_CAP
            break
        try:
            rec = step(state, cp, p, rqn_enabled=rqn_enabled,
                       collect_bhat=collect_bhat)
        except NumericError:
            status = Status.NUMERIC_FAIL
            break
        if trace_hook is not None:
            trace_hook(rec)
        if rec.failure is not None:
            status = rec.failure
            break
        if rec.early_converged:
            status = Status.CONVERGED
            break

    return RunReport(n_iter=state.k, n_f=cp.n_f, n_g=cp.n_g,
                     wall_time=time.perf_counter() - t_start, status=status,
                     final_gnorm_inf=norm_inf(state.g), x=state.x, f=state.f)


def run_with_trace(problem: Problem, params: Optional[SolverParams] = None, *,
                   rqn_enabled: bool = True, collect_bhat: bool = False
                   ) -> Tuple[RunReport, List[TraceRecord]]:
    """run() plus the full list of per-iteration trace records."""
    records: List[TraceRecord] = []
    report = run(problem, params, rqn_enabled=rqn_enabled,
                 trace_hook=records.append, collect_bhat=collect_bhat)
    return report, records
