import math

import numpy as np
import pytest

from rlsmcg.core import (CountingProblem, NumericError, Problem, RunReport,
                         SolverParams, Status, dot, finite_diff_gradient,
                         norm_inf)
from rlsmcg.problems import ext_rosenbrock


def test_dot_orthogonal():
    assert dot(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_dot_hand_value():
    assert dot(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0


def test_dot_self_matches_componentwise_sum():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.standard_normal(rng.integers(1, 40))
        expected = sum(float(x) * float(x) for x in v)
        assert dot(v, v) >= 0.0
        assert dot(v, v) == pytest.approx(expected, rel=1e-12)


def test_dot_length_mismatch():
    with pytest.raises(ValueError):
        dot(np.ones(3), np.ones(4))


def test_norm_inf_zeros():
    assert norm_inf(np.zeros(3)) == 0.0


def test_norm_inf_signed():
    assert norm_inf(np.array([-3.0, 2.0])) == 3.0


def test_norm_inf_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = rng.standard_normal(rng.integers(1, 30))
        assert norm_inf(v) == max(abs(float(x)) for x in v)


def test_norm_inf_empty_rejected():
    with pytest.raises(ValueError):
        norm_inf(np.array([]))


def test_finite_diff_quadratic():
    p = Problem("halfsq", 2, lambda x: 0.5 * float(x @ x), lambda x: x,
                np.zeros(2))
    fd = finite_diff_gradient(p, np.array([1.0, 2.0]))
    assert np.all(np.abs(fd - np.array([1.0, 2.0])) <= 1e-8)


def test_finite_diff_bilinear():
    p = Problem("xy", 2, lambda x: float(x[0] * x[1]),
                lambda x: np.array([x[1], x[0]]), np.zeros(2))
    fd = finite_diff_gradient(p, np.array([2.0, 3.0]))
    assert fd == pytest.approx([3.0, 2.0], abs=1e-8)


def test_finite_diff_rosenbrock_matches_analytic():
    p = ext_rosenbrock(10)
    fd = finite_diff_gradient(p, p.x0)
    an = p.eval_g(p.x0)
    assert np.all(np.abs(fd - an) <= 1e-6 * (1.0 + np.abs(an)))


def test_finite_diff_nonfinite_signals():
    p = Problem("bad", 1, lambda x: math.inf, lambda x: x, np.zeros(1))
    with pytest.raises(NumericError):
        finite_diff_gradient(p, np.zeros(1))


def test_params_defaults_are_protocol_values():
    p = SolverParams()
    assert p.xi1 == 1e-10
    assert p.xi2 == 1.2e4
    assert p.xi3 == 5e-5
    assert p.xi4 == 1e-4
    assert p.xi5 == 0.08
    assert p.eta0_tilde == 1e-9
    assert p.eta1_tilde == 0.5
    assert p.upsilon == 5e-7
    assert p.sigma1 == 0.1
    assert p.sigma2 == 5.0
    assert p.sigma3 == 0.85
    assert p.tau_hat == 1.0
    assert p.tau_bar == 0.225
    assert p.c_bar == 0.1
    assert p.varsigma_bar == 5e-3
    assert p.tau1 == 0.1
    assert p.tau2 == 135.0
    assert p.delta_k == 0.0005
    assert p.sigma_wolfe == 0.9999
    assert p.grad_tol == 1e-6
    assert p.max_iter == 200_000


def test_params_resolve_memory_and_varsigma():
    p = SolverParams()
    small = p.resolve(5)
    assert small.memory_m == 5
    assert small.varsigma == 5e-5
    assert small.l_reset == max(25, 20)
    big = p.resolve(100)
    assert big.memory_m == 11
    assert big.varsigma == 5e-6
    assert big.l_reset == max(121, 20)


@pytest.mark.parametrize("bad", [
    dict(xi4=0.09, xi5=0.08),       # needs xi4 < xi5
    dict(eta0_tilde=0.6, eta1_tilde=0.5),
    dict(sigma1=0.0),
    dict(sigma2=1.0),
    dict(mu_min=2.0, mu_max=1.0),
    dict(sigma_wolfe=1.0),
    dict(delta_k=0.95),
    dict(alpha_min=1.0, alpha_max=0.5),
    dict(grad_tol=-1.0),
    dict(memory_m=0),
])
def test_params_validation_rejects(bad):
    with pytest.raises(ValueError):
        SolverParams(**bad)


def test_problem_validates_dimension_and_start():
    with pytest.raises(ValueError):
        Problem("p", 0, lambda x: 0.0, lambda x: x, np.zeros(0))
    with pytest.raises(ValueError):
        Problem("p", 3, lambda x: 0.0, lambda x: x, np.zeros(2))


def test_counting_problem_counts_every_call():
    p = Problem("halfsq", 2, lambda x: 0.5 * float(x @ x), lambda x: x,
                np.zeros(2))
    cp = CountingProblem(p)
    x = np.array([1.0, 1.0])
    for _ in range(3):
        cp.f(x)
    cp.g(x)
    assert cp.n_f == 3
    assert cp.n_g == 1


def test_run_report_holds_fields():
    rep = RunReport(n_iter=2, n_f=5, n_g=3, wall_time=0.1,
                    status=Status.CONVERGED, final_gnorm_inf=1e-8)
    assert rep.n_f >= rep.n_iter
    assert rep.n_g >= rep.n_iter
