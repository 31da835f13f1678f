"""Centered finite-difference stencil generation and application."""

from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdefind.grid import Grid1D, SolutionField
from mdefind.stencils import (
    apply_spatial,
    apply_stencil_periodic,
    apply_temporal,
    make_centered_stencil,
)

# Frozen oracle: classic 8th-order centered first-derivative weights.
FIRST_DERIV_ORDER8 = [
    1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280
]
# Frozen oracle: classic 8th-order centered second-derivative weights.
SECOND_DERIV_ORDER8 = [
    -1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560
]


def make_field(values, dt=1.0):
    values = np.asarray(values, dtype=float)
    grid = Grid1D(nx=values.shape[1], nt=values.shape[0], dt=dt)
    return SolutionField(grid=grid, values=values, scheme_id="test")


def test_first_derivative_order8_matches_tabulated():
    st_ = make_centered_stencil(1, 8)
    np.testing.assert_allclose(st_.coefficients, FIRST_DERIV_ORDER8, rtol=1e-14)
    assert list(st_.offsets) == list(range(-4, 5))


def test_second_derivative_order8_matches_tabulated():
    st_ = make_centered_stencil(2, 8)
    np.testing.assert_allclose(st_.coefficients, SECOND_DERIV_ORDER8, rtol=1e-14)


@pytest.mark.parametrize(
    "d,a", [(1, 2), (1, 8), (2, 8), (3, 8), (5, 8), (7, 8), (3, 12)]
)
def test_stencil_length_rule(d, a):
    st_ = make_centered_stencil(d, a)
    assert len(st_.coefficients) == 2 * ((d + 1) // 2) - 1 + a
    assert st_.derivative_order == d and st_.accuracy == a


@pytest.mark.parametrize("d,a", [(1, 8), (2, 8), (4, 8), (6, 8), (7, 8)])
def test_moment_conditions(d, a):
    """sum_i c_i i^m = m! * delta(m, d) for all m below the design order."""
    st_ = make_centered_stencil(d, a)
    offsets = np.array(st_.offsets, dtype=float)
    for m in range(len(st_)):
        moment = float(np.sum(st_.coefficients * offsets**m))
        expected = float(factorial(d)) if m == d else 0.0
        assert abs(moment - expected) < 1e-7 * max(1.0, offsets[-1] ** m), (m, moment)


def test_rejects_odd_accuracy():
    with pytest.raises(ValueError):
        make_centered_stencil(1, 3)


@pytest.mark.parametrize("d", range(1, 8))
def test_spatial_derivative_of_sine(d):
    nx = 256
    x = np.arange(nx) / nx
    field = make_field(np.sin(2 * np.pi * x)[None, :])
    got = apply_spatial(field, d)[0]
    w = 2 * np.pi
    exact = w**d * np.sin(2 * np.pi * x + d * np.pi / 2)
    # round-off amplification eps * sum|c| / dx^d dominates truncation for
    # high d at this resolution
    st_ = make_centered_stencil(d, 8)
    roundoff = np.finfo(float).eps * np.abs(st_.coefficients).sum() * nx**d
    np.testing.assert_allclose(
        got, exact, rtol=1e-6, atol=1e-6 * w**d + 10 * roundoff
    )


@settings(max_examples=25, deadline=None)
@given(shift=st.integers(min_value=-64, max_value=64),
       d=st.integers(min_value=1, max_value=4))
def test_shift_equivariance(shift, d):
    rng = np.random.default_rng(7)
    u = rng.normal(size=64)
    st_ = make_centered_stencil(d, 8)
    direct = np.roll(apply_stencil_periodic(u, st_, 1.0 / 64), shift)
    shifted = apply_stencil_periodic(np.roll(u, shift), st_, 1.0 / 64)
    np.testing.assert_allclose(direct, shifted, rtol=0, atol=1e-10 * 64**d)


def test_stencil_wider_than_axis_rejected():
    with pytest.raises(ValueError):
        apply_stencil_periodic(np.zeros(5), make_centered_stencil(1, 8), 1.0)


def test_temporal_interior_only_shape():
    nt, nx = 17, 12
    field = make_field(np.tile(np.arange(nt, dtype=float)[:, None] ** 2, (1, nx)))
    out = apply_temporal(field, 1, pad_t=6)
    assert out.shape == (nt - 12, nx)


def test_temporal_derivative_of_polynomial():
    nt, nx, dt = 17, 4, 0.5
    t = np.arange(nt) * dt
    field = make_field(np.tile((t**3)[:, None], (1, nx)), dt=dt)
    out = apply_temporal(field, 1, pad_t=6)
    interior = t[6:11]
    np.testing.assert_allclose(
        out, np.tile((3 * interior**2)[:, None], (1, nx)), rtol=1e-9, atol=1e-9
    )


def test_temporal_rejects_insufficient_pad():
    field = make_field(np.zeros((17, 4)))
    with pytest.raises(ValueError):
        apply_temporal(field, 1, pad_t=2)  # below half-width 4 at accuracy 8


def test_temporal_rejects_too_few_levels():
    field = make_field(np.zeros((10, 4)))
    with pytest.raises(ValueError):
        apply_temporal(field, 1, pad_t=6)
