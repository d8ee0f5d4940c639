"""Orthogonality monitoring and the regularized BFGS iteration in a direction subspace.

When the current gradient (numerically) falls inside the span of the last m
search directions, conjugate-gradient behavior degrades; the driver then
switches to a quasi-Newton iteration confined to that span.  The machinery
here provides the orthonormal basis (rank-revealing modified Gram-Schmidt),
the enter/exit predicates, the regularized BFGS update of the reduced
Hessian, and the lift of the reduced direction back to full space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import (CaseTag, DirectionRecord, EmptySubspaceError, NumericError,
                   SolverParams, Vector)

# columns whose residual after projection is below this times their original
# norm are treated as linearly dependent and dropped
DROP_TOL = 1e-12

# a frozen phase basis must be numerically well conditioned; ~sqrt(eps) is
# the usual half-precision-lost threshold.  During a conjugate-gradient
# stall the recent directions cluster, so their well-conditioned core is a
# proper subspace: exactly the polluted span worth minimizing over.
ENTRY_RANK_TOL = 1e-8


@dataclass(frozen=True)
class SubspaceFactorization:
    """Thin QR of the recent-direction matrix: Z orthonormal, R upper triangular."""

    Z: np.ndarray
    R_bar: np.ndarray
    source_dirs: List[Vector]

    @property
    def rank(self) -> int:
        return self.Z.shape[1]


@dataclass(frozen=True)
class SubspaceHessian:
    """Reduced Hessian approximation carried through one quasi-Newton phase.

    ``mu`` is the regularization weight folded into the update through the
    shifted gradient difference y + mu*s; ``updates_since_reset == 0`` means
    the matrix is the identity.
    """

    B_hat: np.ndarray
    updates_since_reset: int
    mu: float

    @classmethod
    def identity(cls, m: int, mu: float) -> "SubspaceHessian":
        return cls(B_hat=np.eye(m), updates_since_reset=0, mu=mu)

    @property
    def is_identity(self) -> bool:
        return self.updates_since_reset == 0


def qr_update(dirs: List[Vector],
              drop_tol: float = DROP_TOL) -> SubspaceFactorization:
    """Rank-revealing modified Gram-Schmidt with one reorthogonalization pass.

    Dependent columns (residual <= drop_tol * original norm) are dropped,
    shrinking the basis.  Raises EmptySubspaceError when nothing survives.
    """
    if not dirs:
        raise EmptySubspaceError("no directions supplied")
    kept_cols: List[Vector] = []
    kept_dirs: List[Vector] = []
    coeffs: List[np.ndarray] = []
    for d in dirs:
        d = np.asarray(d, dtype=float)
        nrm0 = float(np.linalg.norm(d))
        if nrm0 == 0.0 or not math.isfinite(nrm0):
            continue
        v = d.copy()
        r = np.zeros(len(kept_cols) + 1)
        for _ in range(2):  # reorthogonalize once for orthonormality to ~1e-15
            for j, q in enumerate(kept_cols):
                c = float(np.dot(q, v))
                r[j] += c
                v -= c * q
        resid = float(np.linalg.norm(v))
        if resid <= drop_tol * nrm0:
            continue
        r[len(kept_cols)] = resid
        kept_cols.append(v / resid)
        kept_dirs.append(d)
        coeffs.append(r)
    if not kept_cols:
        raise EmptySubspaceError("all candidate columns dropped as dependent")
    m = len(kept_cols)
    Z = np.column_stack(kept_cols)
    R = np.zeros((m, m))
    for j, r in enumerate(coeffs):
        R[: j + 1, j] = r[: j + 1]
    return SubspaceFactorization(Z=Z, R_bar=R, source_dirs=kept_dirs)


def orthogonality_lost(fact: SubspaceFactorization, g: Vector,
                       params: SolverParams) -> bool:
    """True when g lies (almost) inside the span: ||Z'g||^2 >= (1 - eta0^2) ||g||^2."""
    gTg = float(np.dot(g, g))
    if gTg <= 0.0:
        return False
    proj = float(np.dot(fact.Z.T @ g, fact.Z.T @ g))
    return proj >= (1.0 - params.eta0_tilde ** 2) * gTg


def orthogonality_restored(fact: SubspaceFactorization, g: Vector,
                           params: SolverParams) -> bool:
    """True when the in-span part has shrunk: ||Z'g||^2 <= (1 - eta1^2) ||g||^2."""
    gTg = float(np.dot(g, g))
    if gTg <= 0.0:
        return True
    proj = float(np.dot(fact.Z.T @ g, fact.Z.T @ g))
    return proj <= (1.0 - params.eta1_tilde ** 2) * gTg


def rbfgs_update(H: SubspaceHessian, s_hat: Vector, y_hat: Vector, k: int,
                 params: SolverParams) -> SubspaceHessian:
    """Regularized BFGS update of the reduced Hessian.

    With y(mu) = y_hat + mu * s_hat, the update applies when the phase
    counter k is not a multiple of l_reset and the shifted curvature
    s'y(mu)/s's clears the floor; otherwise the matrix resets to the
    identity.  A non-finite result also resets.
    """
    m = H.B_hat.shape[0]
    if k % params.l_reset == 0:
        return SubspaceHessian.identity(m, H.mu)
    sTs = float(np.dot(s_hat, s_hat))
    y_mu = y_hat + H.mu * s_hat
    sTy_mu = float(np.dot(s_hat, y_mu))
    if sTs <= 0.0 or sTy_mu / sTs < params.upsilon:
        return SubspaceHessian.identity(m, H.mu)
    B = H.B_hat
    Bs = B @ s_hat
    sBs = float(np.dot(s_hat, Bs))
    if sBs <= 0.0:
        return SubspaceHessian.identity(m, H.mu)
    B_new = B - np.outer(Bs, Bs) / sBs + np.outer(y_mu, y_mu) / sTy_mu
    B_new = 0.5 * (B_new + B_new.T)
    if not np.all(np.isfinite(B_new)):
        return SubspaceHessian.identity(m, H.mu)
    try:
        np.linalg.cholesky(B_new)
    except np.linalg.LinAlgError:
        # positive definiteness lost to rounding (near-degenerate pair)
        return SubspaceHessian.identity(m, H.mu)
    return SubspaceHessian(B_hat=B_new,
                           updates_since_reset=H.updates_since_reset + 1,
                           mu=H.mu)


def ratio(f_cur: float, f_trial: float, alpha: float, g_hat: Vector,
          d_hat: Vector, B_hat_mu: np.ndarray) -> Optional[float]:
    """Actual-over-model decrease for the trial step alpha * d_hat.

    Model: q = f_cur + alpha g'd + alpha^2 d'Bd / 2.  Returns None when the
    model predicts no decrease (caller then grows mu as if the ratio were
    poor).
    """
    pred = -(alpha * float(np.dot(g_hat, d_hat))
             + 0.5 * alpha * alpha * float(d_hat @ B_hat_mu @ d_hat))
    if pred <= 0.0 or not math.isfinite(pred):
        return None
    return (f_cur - f_trial) / pred


def update_mu(mu: float, r: Optional[float], s_hat_norm2: float,
              params: SolverParams) -> float:
    """Trust-region-flavored update of the regularization weight.

    Small steps adapt mu by the decrease ratio (shrink on success, grow on
    failure, clipped to [mu_min, mu_max]); large steps switch regularization
    off entirely.  A ``None`` ratio (no model decrease) counts as failure.
    """
    if s_hat_norm2 > params.tau_hat:
        return 0.0
    if r is not None and r >= params.sigma3:
        return max(params.mu_min, params.sigma1 * mu)
    return min(params.mu_max, params.sigma2 * mu)


def rqn_direction(fact: SubspaceFactorization, H: SubspaceHessian,
                  g: Vector) -> DirectionRecord:
    """Lifted quasi-Newton step d = -Z B^{-1} Z'g via a Cholesky solve.

    On a factorization failure the reduced Hessian is replaced by the
    identity and the solve retried once; a second failure raises
    NumericError.
    """
    g_hat = fact.Z.T @ g
    B = H.B_hat
    for attempt in range(2):
        try:
            L = np.linalg.cholesky(B)
            d_hat = -np.linalg.solve(L.T, np.linalg.solve(L, g_hat))
        except np.linalg.LinAlgError:
            d_hat = None
        if d_hat is not None and np.all(np.isfinite(d_hat)):
            break
        if attempt == 1:
            raise NumericError("reduced quasi-Newton solve failed twice")
        B = np.eye(B.shape[0])
    d = fact.Z @ d_hat
    return DirectionRecord(d=d, case_tag=CaseTag.RQN, gTd=float(np.dot(g, d)))
