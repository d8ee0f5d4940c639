"""The ill-conditioned stall and the subspace quasi-Newton rescue.

On severely ill-conditioned quadratics, conjugate-gradient directions
cluster and the gradient gets trapped (numerically) inside their span; the
solver detects this, freezes a well-conditioned basis of that span, runs a
regularized BFGS iteration on the slice, and exits once the gradient points
back out.  Disabling the rescue shows the raw stall for comparison.
"""

from rlsmcg import get_problem
from rlsmcg.solver import run_with_trace

for name in ("quad_hilbert(8)", "palmer_poly(8)"):
    prob = get_problem(name)
    full, trace = run_with_trace(prob)
    print(f"== {name}")
    for rec in trace:
        if rec.entered_rqn:
            print(f"   k={rec.k:4d}: gradient captured by the direction span "
                  f"-> subspace phase begins (||g||_inf={rec.gnorm_inf:.2e})")
        if rec.exited_rqn:
            print(f"   k={rec.k:4d}: orthogonality restored "
                  f"-> back to conjugate gradients (||g||_inf={rec.gnorm_inf:.2e})")
    print(f"   with rescue:    {full.status.value} in {full.n_iter} iterations, "
          f"{full.n_g} gradient evaluations")

    ablation, _ = run_with_trace(prob, rqn_enabled=False)
    verdict = ablation.status.value
    print(f"   without rescue: {verdict} in {ablation.n_iter} iterations, "
          f"{ablation.n_g} gradient evaluations "
          f"({ablation.n_g / full.n_g:.1f}x the gradient work)")
