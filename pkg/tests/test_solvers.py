"""Finite-difference scheme updates, stability guards and MMS forcing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdefind.grid import BlowUpError, Grid1D
from mdefind import solvers
from mdefind.solvers import (
    FTBS,
    MACCORMACK,
    ZABUSKY_KRUSKAL,
    ZK_STABILITY_BOUND,
    dt_from_cfl,
    ftbs_step,
    maccormack_step,
    maccormack_step_single_equation,
    manufactured_case,
    mms_convergence,
    run_simulation,
    zabusky_kruskal_first_step,
    zabusky_kruskal_step,
)


def rng_field(n=64, seed=0, scale=1.0):
    return scale * np.random.default_rng(seed).normal(size=n)


def test_ftbs_matches_update_formula():
    u = rng_field()
    a, h = 1.3, 0.4
    expected = u - a * h * (u - np.roll(u, 1))
    np.testing.assert_allclose(ftbs_step(u, a, h), expected, rtol=1e-15)


def test_ftbs_exact_shift_at_unit_cfl():
    """At a*h = 1 FTBS reduces to an exact one-cell shift."""
    u = rng_field(seed=3)
    np.testing.assert_allclose(ftbs_step(u, 1.0, 1.0), np.roll(u, 1), atol=1e-14)


def test_ftbs_warns_above_cfl_one():
    with pytest.warns(UserWarning, match="exceeds 1"):
        ftbs_step(np.ones(8), 2.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000))
def test_maccormack_equals_single_equation_form(seed):
    """Predictor-corrector and single-equation rewrite agree to roundoff."""
    u = rng_field(seed=seed, scale=0.5)
    dx = 1.0 / len(u)
    h = 0.37
    a_form = maccormack_step(u, h)
    b_form = maccormack_step_single_equation(u, h, dx)
    np.testing.assert_allclose(a_form, b_form, rtol=0, atol=1e-12)


def test_maccormack_conserves_mean():
    u = rng_field(seed=5, scale=0.3)
    stepped = maccormack_step(u, 0.25)
    assert abs(np.sum(stepped) - np.sum(u)) < 1e-12 * len(u)


def test_zk_step_matches_update_formula():
    u_prev, u = rng_field(seed=1, scale=0.1), rng_field(seed=2, scale=0.1)
    h, dx = 1e-4, 1.0 / 64
    up, um = np.roll(u, -1), np.roll(u, 1)
    nonlinear = (up + u + um) * (up - um)
    third = np.roll(u, -2) - 2 * up + 2 * um - np.roll(u, 2)
    expected = u_prev - 2.0 * h * nonlinear - (h / dx**2) * third
    got = zabusky_kruskal_step(u_prev, u, h, dx)
    np.testing.assert_allclose(got, expected, rtol=1e-14)


def test_zk_conserves_mean():
    """Both ZK updates are in conservation form: sum(u) is preserved."""
    u0 = rng_field(seed=9, scale=0.05)
    h, dx = 1e-5, 1.0 / 64
    u1 = zabusky_kruskal_first_step(u0, h, dx)
    assert abs(np.sum(u1) - np.sum(u0)) < 1e-10
    u2 = zabusky_kruskal_step(u0, u1, h, dx)
    assert abs(np.sum(u2) - np.sum(u0)) < 1e-10


def test_zk_stability_bound_value():
    assert ZK_STABILITY_BOUND == pytest.approx(2.0 / (3.0 * math.sqrt(3.0)), rel=1e-15)


def test_zk_warns_when_unstable():
    u = 0.1 * np.ones(32)
    with pytest.warns(UserWarning, match="stability"):
        zabusky_kruskal_step(u, u, h=1.0, dx=1.0 / 32)


def test_dt_from_cfl_definitions():
    dx = 0.01
    assert dt_from_cfl(FTBS, 0.5, dx, a=2.0) == pytest.approx(0.5 * dx / 2.0)
    u0 = np.array([0.2, -0.5, 0.1])
    for scheme in (MACCORMACK, ZABUSKY_KRUSKAL):
        assert dt_from_cfl(scheme, 0.5, dx, u0=u0) == pytest.approx(0.5 * dx / 0.5)
    with pytest.raises(ValueError):
        dt_from_cfl(MACCORMACK, 0.5, dx, u0=np.zeros(3))
    with pytest.raises(ValueError):
        dt_from_cfl(FTBS, -1.0, dx)


def test_run_simulation_shapes_and_first_level():
    u0 = np.sin(2 * np.pi * np.arange(50) / 50)
    grid = Grid1D(nx=50, nt=9, dt=1e-4)
    field = run_simulation(FTBS, u0, grid)
    assert field.values.shape == (9, 50)
    np.testing.assert_array_equal(field.values[0], u0)
    final_only = run_simulation(FTBS, u0, grid, store=False)
    np.testing.assert_allclose(final_only, field.values[-1], rtol=1e-15)


def test_run_simulation_blowup_reports_step():
    u0 = np.sin(2 * np.pi * np.arange(32) / 32)
    grid = Grid1D(nx=32, nt=200, dt=1.0)  # ZK wildly unstable at dt = 1
    with pytest.raises(BlowUpError) as err, pytest.warns(UserWarning):
        run_simulation(ZABUSKY_KRUSKAL, u0, grid)
    assert err.value.step >= 1


def test_manufactured_sources_satisfy_pde():
    """Forcing equals u_t + (spatial operator) of the exact solution."""
    x = np.arange(400) / 400
    t = 0.37
    eps = 1e-6
    for scheme in (FTBS, MACCORMACK, ZABUSKY_KRUSKAL):
        case = manufactured_case(scheme)
        u_t = (case.exact_solution(x, t + eps) - case.exact_solution(x, t - eps)) / (2 * eps)
        u = case.exact_solution(x, t)
        two_pi = 2 * math.pi
        ux = two_pi * np.cos(two_pi * (x + t))
        uxxx = -(two_pi**3) * np.cos(two_pi * (x + t))
        if scheme == FTBS:
            lhs = u_t + 1.0 * ux
        elif scheme == MACCORMACK:
            lhs = u_t + u * ux
        else:
            lhs = u_t + 6.0 * u * ux + uxxx
        np.testing.assert_allclose(lhs, case.source_term(x, t), rtol=1e-5, atol=1e-3)


@pytest.mark.parametrize("scheme,expected", [(FTBS, 1.0), (MACCORMACK, 2.0)])
def test_mms_orders_quick(scheme, expected):
    records = mms_convergence(scheme, [32, 64, 128], cfl=0.1)
    orders = [r["pairwise_order"] for r in records[1:]]
    assert all(abs(o - expected) < 0.25 for o in orders), orders


def test_mms_requires_two_resolutions():
    with pytest.raises(ValueError):
        mms_convergence(FTBS, [32], cfl=0.1)
