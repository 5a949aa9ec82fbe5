import numpy as np
import pytest

from proxpen.baseline import CgConfig, pg_certificate, pg_step, run_pg
from proxpen.errors import ConvergenceError, DomainError
from proxpen.instances import gen_simplex_qp, simplex_indicator
from proxpen.problem import CompositeProblem, quadratic, zero_function

from conftest import half_norm_sq


def _half_norm_problem(n=3):
    return CompositeProblem(half_norm_sq(n), zero_function(n))


def test_pg_step_examples():
    z = np.array([2.0, -4.0, 1.0])
    np.testing.assert_allclose(pg_step(_half_norm_problem(), 0.5, z), 0.5 * z)
    np.testing.assert_allclose(pg_step(_half_norm_problem(), 1.0, z), 0.0)
    # with g = 0 the step is the projection
    pr = CompositeProblem(quadratic(np.zeros((2, 2)), m=0.0, M=0.0), simplex_indicator())
    np.testing.assert_allclose(pg_step(pr, 0.3, np.array([1.0, 0.0])), [1.0, 0.0])


def test_pg_step_outside_domain():
    pr = CompositeProblem(half_norm_sq(2), simplex_indicator())
    with pytest.raises(DomainError):
        pg_step(pr, 0.1, np.array([1.0, 1.0]))


def test_certificate_hand_example():
    pr = _half_norm_problem(2)
    e1 = np.array([1.0, 0.0])
    v, eps, s_eff = pg_certificate(pr, 1.0, e1, np.zeros(2))
    np.testing.assert_allclose(v, e1)
    assert eps == pytest.approx(1.0)
    assert s_eff == pytest.approx(0.75)


def test_certificate_fixed_point():
    pr = _half_norm_problem(2)
    v, eps, s_eff = pg_certificate(pr, 0.5, np.zeros(2), np.zeros(2))
    assert np.all(v == 0) and eps == 0 and s_eff == 0


def test_certificate_rejects_non_step():
    pr = _half_norm_problem(2)
    with pytest.raises(ValueError):
        pg_certificate(pr, 0.5, np.ones(2), np.ones(2))


def test_sigma_eff_within_curvature_bounds():
    inst = gen_simplex_qp(5, 20, 200.0, 5.0, seed=7)
    pr = inst.problem()
    m, M = inst.m, inst.M
    lam = 0.99 / M
    rng = np.random.default_rng(2)
    for _ in range(50):
        z_prev = rng.dirichlet(np.ones(20))
        z = pg_step(pr, lam, z_prev)
        _, eps, s_eff = pg_certificate(pr, lam, z_prev, z)
        if s_eff == 0:
            continue
        assert (2 - lam * m) / 4 - 1e-9 <= s_eff <= (2 + lam * M) / 4 + 1e-9
        assert s_eff < 0.75


def test_stationary_start_takes_one_iteration():
    c = np.array([0.2, 0.8])
    pr = CompositeProblem(quadratic(np.eye(2), -c, m=0.0, M=1.0), simplex_indicator())
    z, v, st = run_pg(pr, c, CgConfig(lam=0.5))
    assert st["iterations"] == 1
    np.testing.assert_allclose(z, c)
    assert np.linalg.norm(v) == 0


def test_strongly_convex_converges_to_minimizer():
    # projection of (0.9, 0.5, -0.2) onto the simplex is (0.7, 0.3, 0)
    target = np.array([0.9, 0.5, -0.2])
    pr = CompositeProblem(quadratic(np.eye(3), -target, m=0.0, M=1.0), simplex_indicator())
    z, v, st = run_pg(pr, np.full(3, 1 / 3), CgConfig(lam=0.99, rho_bar=1e-12))
    np.testing.assert_allclose(z, [0.7, 0.3, 0.0], atol=1e-10)


def test_descent_and_inclusion_on_instance():
    inst = gen_simplex_qp(5, 30, 500.0, 2.0, seed=3)
    pr = inst.problem()
    g = pr.smooth
    z, v, st = run_pg(pr, inst.centroid(), CgConfig(lam=0.99 / inst.M, rho_bar=1e-6))
    phi = np.array(st["phi"])
    assert np.all(np.diff(phi) <= 1e-9 * (1 + np.abs(phi[1:])))
    assert st["criterion"] <= 1e-6
    s = v - g.grad(z)
    assert np.max(s) - s @ z <= 1e-9 * (1 + np.abs(s).max())
    np.testing.assert_allclose(pg_step(pr, 0.99 / inst.M, st["z_prev"]), z)


def test_config_validation():
    pr = CompositeProblem(quadratic(np.diag([4.0, -2.0]), m=2.0, M=4.0), zero_function(2))
    for lam in (0.0, 0.5, 0.6):
        with pytest.raises(ValueError):
            run_pg(pr, np.zeros(2), CgConfig(lam=lam))


def test_iteration_cap_raises():
    inst = gen_simplex_qp(5, 30, 500.0, 2.0, seed=3)
    with pytest.raises(ConvergenceError):
        run_pg(inst.problem(), inst.centroid(),
               CgConfig(lam=0.99 / inst.M, rho_bar=1e-12, max_iterations=5))


def test_trace_rows():
    inst = gen_simplex_qp(3, 10, 50.0, 1.0, seed=1)
    rows = []
    run_pg(inst.problem(), inst.centroid(), CgConfig(lam=0.99 / inst.M, rho_bar=1e-4),
           trace=rows.append)
    assert rows and set(rows[0]) == {"k", "phi", "norm_v", "sigma_eff"}
    assert all(r["sigma_eff"] < 0.75 for r in rows)
