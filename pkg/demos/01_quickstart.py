"""Quickstart: minimize a few classic problems and read the run reports.

The solver needs nothing beyond a Problem (objective, exact gradient,
standard start).  `run` returns a report with iteration and evaluation
counts, termination status, and the final gradient norm.
"""

import numpy as np

from rlsmcg import Problem, SolverParams, get_problem, run

# a problem straight from the registry
report = run(get_problem("ext_rosenbrock(100)"))
print("extended Rosenbrock, n=100")
print(f"  status={report.status.value}  iterations={report.n_iter}  "
      f"f-evals={report.n_f}  g-evals={report.n_g}")
print(f"  final ||g||_inf = {report.final_gnorm_inf:.2e}, f = {report.f:.2e}")

# or hand-rolled: f(x) = sum exp(x_i) - x_i  (minimum at x = 0)
n = 20
custom = Problem(
    name="expsum", dim=n,
    eval_f=lambda x: float(np.sum(np.exp(x) - x)),
    eval_g=lambda x: np.exp(x) - 1.0,
    x0=np.full(n, 2.0))
report = run(custom)
print(f"\ncustom exp-sum, n={n}: {report.status.value} in {report.n_iter} "
      f"iterations, ||g||_inf = {report.final_gnorm_inf:.2e}")

# every tolerance and threshold is a SolverParams field
tight = SolverParams(grad_tol=1e-10)
report = run(custom, tight)
print(f"tight tolerance 1e-10: {report.status.value} in {report.n_iter} "
      f"iterations, ||g||_inf = {report.final_gnorm_inf:.2e}")
