"""Watch the direction selection choose among its four branches.

Each iteration of the conjugate-gradient state classifies the local model:
a cubic-regularized subspace solve when curvature is trustworthy but the
quadratic fit is poor, the plain quadratic solve when the fit is good, a
Hestenes-Stiefel step when curvature is suspect but the cross terms are
bounded, and a plain -g restart otherwise.  The trace records the branch
taken at every iteration.
"""

from collections import Counter

from rlsmcg import get_problem
from rlsmcg.solver import run_with_trace

for name in ("quad_diag(50)", "ext_rosenbrock(100)", "trigonometric(100)"):
    report, trace = run_with_trace(get_problem(name))
    tally = Counter(rec.case_tag.value for rec in trace)
    print(f"{name}: {report.status.value} in {report.n_iter} iterations")
    for case, count in tally.most_common():
        print(f"   {case:18s} x{count}")

# the first few iterations of the nonquadratic run, in detail
print("\nfirst iterations on ext_rosenbrock(100):")
print(f"{'k':>4} {'case':20s} {'alpha':>10} {'closeness t':>12} {'||g||_inf':>10}")
_, trace = run_with_trace(get_problem("ext_rosenbrock(100)"))
for rec in trace[:12]:
    t = f"{rec.t_k:.3g}" if rec.t_k != float("inf") else "-"
    print(f"{rec.k:>4} {rec.case_tag.value:20s} {rec.alpha:>10.3g} "
          f"{t:>12} {rec.gnorm_inf:>10.2e}")
