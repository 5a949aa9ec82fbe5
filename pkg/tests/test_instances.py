import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from proxpen.errors import CalibrationError
from proxpen.instances import (calibrate_curvature, gen_linconstr_qp, gen_simplex_qp,
                               make_rng, project_simplex)
from proxpen.problem import check_curvature
from proxpen.instances import simplex_indicator

from conftest import brute_force_simplex_projection


def test_project_feasible_point_unchanged():
    np.testing.assert_allclose(project_simplex([0.5, 0.5]), [0.5, 0.5])


def test_project_to_vertex():
    np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])


def test_project_frozen_oracle_value():
    # support enumeration gives x + 1/15 on all coordinates
    expect = brute_force_simplex_projection([0.4, 0.3, 0.1])
    np.testing.assert_allclose(expect, [7 / 15, 11 / 30, 1 / 6], atol=1e-15)
    np.testing.assert_allclose(project_simplex([0.4, 0.3, 0.1]), [7 / 15, 11 / 30, 1 / 6],
                               atol=1e-12)


def test_project_output_is_on_simplex():
    rng = np.random.default_rng(0)
    for scale in (1e-3, 1.0, 1e3, 1e6):
        z = project_simplex(scale * rng.standard_normal(40))
        assert z.min() >= 0
        assert abs(z.sum() - 1.0) <= 1e-12


def test_project_handles_ties():
    np.testing.assert_allclose(project_simplex([1.0, 1.0, 1.0, 1.0]), [0.25] * 4)
    np.testing.assert_allclose(project_simplex([3.0, 3.0, -1.0]), [0.5, 0.5, 0.0])


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 4, elements=st.floats(-10, 10)))
def test_project_matches_support_enumeration(x):
    np.testing.assert_allclose(project_simplex(x), brute_force_simplex_projection(x),
                               atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 6, elements=st.floats(-100, 100)))
def test_project_idempotent(x):
    z = project_simplex(x)
    np.testing.assert_allclose(project_simplex(z), z, atol=1e-12)


def test_calibrate_diagonal_example():
    xi, tau = calibrate_curvature(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 2.0, 3.0)
    assert xi == pytest.approx(3.0, rel=1e-9)
    assert tau == pytest.approx(2.0, rel=1e-9)


def test_calibrate_degenerate_raises():
    with pytest.raises(CalibrationError):
        calibrate_curvature(np.eye(2), np.eye(2), 1.0, 1.0)


@pytest.mark.parametrize("M,m", [(1.0, 1.0), (4000.0, 1.0), (16777216.0, 16.0),
                                 (16777216.0, 16777216.0)])
def test_generated_spectrum(M, m):
    inst = gen_simplex_qp(10, 50, M, m, seed=3)
    ev = np.linalg.eigvalsh(inst.hessian)
    assert ev[-1] == pytest.approx(M, rel=1e-6)
    assert ev[0] == pytest.approx(-m, rel=1e-6)


def test_generated_entries_ranges():
    inst = gen_simplex_qp(6, 30, 100.0, 1.0, seed=11)
    for X in (inst.A, inst.B, inst.b):
        assert X.min() >= 0 and X.max() <= 1
    assert np.all(inst.d == np.round(inst.d))
    assert inst.d.min() >= 1 and inst.d.max() <= 1000
    assert inst.xi > 0 and inst.tau > 0


def test_generation_is_deterministic():
    a = gen_simplex_qp(5, 20, 100.0, 2.0, seed=42)
    b = gen_simplex_qp(5, 20, 100.0, 2.0, seed=42)
    for k in ("A", "B", "d", "b"):
        assert np.array_equal(getattr(a, k), getattr(b, k))
    assert (a.xi, a.tau) == (b.xi, b.tau)
    c = gen_simplex_qp(5, 20, 100.0, 2.0, seed=43)
    assert not np.array_equal(a.A, c.A)


def test_rng_is_pcg64():
    assert isinstance(make_rng(1).bit_generator, np.random.PCG64)


def test_large_instance_shapes():
    inst = gen_simplex_qp(20, 300, 16777216.0, 16.0, seed=1)
    assert inst.A.shape == (20, 300)
    assert inst.B.shape == (300, 300)
    ev = np.linalg.eigvalsh(inst.hessian)
    assert ev[-1] == pytest.approx(16777216.0, rel=1e-6)
    assert ev[0] == pytest.approx(-16.0, rel=1e-6)


def test_generation_validates():
    with pytest.raises(ValueError):
        gen_simplex_qp(5, 20, 1.0, 2.0, seed=0)


def test_curvature_check_with_many_samples():
    inst = gen_simplex_qp(10, 50, 1000.0, 10.0, seed=8)
    rep = check_curvature(inst.oracle(), 10_000, seed=0, domain=simplex_indicator())
    assert rep["violations"] == []


def test_linconstr_feasible_point():
    inst = gen_linconstr_qp(5, 30, 4, 100.0, 1.0, seed=2)
    assert np.linalg.norm(inst.A_eq @ inst.z_feas - inst.b_eq) <= 1e-12
    assert inst.z_feas.min() >= 0
    assert inst.z_feas.sum() == pytest.approx(1.0, abs=1e-12)
    assert inst.A_eq.shape == (4, 30)
    again = gen_linconstr_qp(5, 30, 4, 100.0, 1.0, seed=2)
    assert np.array_equal(inst.A_eq, again.A_eq)
    assert np.array_equal(inst.z_feas, again.z_feas)
    # objective part matches the unconstrained generator with the same seed
    base = gen_simplex_qp(5, 30, 100.0, 1.0, seed=2)
    assert np.array_equal(inst.A, base.A)
