"""Periodic B-spline initial conditions and particle-swarm optimization."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdefind.splines import (
    PeriodicSpline,
    SwarmConfig,
    gauss_ic,
    load_ic_artifact,
    optimize_ic,
    particle_swarm_minimize,
    save_ic_artifact,
)
from mdefind.library import LibrarySpec
from mdefind.solvers import FTBS


def spline(seed=0, knots=15, degree=8):
    rng = np.random.default_rng(seed)
    return PeriodicSpline(rng.uniform(-1, 1, size=knots), degree)


def test_spline_periodicity_and_smoothness():
    s = spline()
    x = np.linspace(0, 1, 97, endpoint=False)
    np.testing.assert_allclose(s(x), s(x + 1.0), atol=1e-12)
    np.testing.assert_allclose(s(x), s(x - 3.0), atol=1e-12)
    # values at the seam agree from both sides
    eps = 1e-9
    assert abs(s(np.array([eps]))[0] - s(np.array([1 - eps]))[0]) < 1e-6


def test_spline_partition_of_unity():
    """Constant control values reproduce the constant exactly."""
    s = PeriodicSpline(np.full(12, 0.7), degree=8)
    x = np.linspace(0, 1, 61, endpoint=False)
    np.testing.assert_allclose(s(x), 0.7, atol=1e-12)


def test_spline_requires_enough_controls():
    with pytest.raises(ValueError):
        PeriodicSpline(np.ones(8), degree=8)


def test_artifact_round_trip(tmp_path):
    s = spline(seed=4, knots=11)
    path = tmp_path / "ic.json"
    save_ic_artifact(path, s, seed=4, extra={"note": "test"})
    loaded = load_ic_artifact(path)
    x = np.linspace(0, 1, 33, endpoint=False)
    np.testing.assert_array_equal(loaded(x), s(x))
    payload = json.loads(path.read_text())
    assert payload["kind"] == "periodic_bspline"
    assert payload["seed"] == 4 and payload["note"] == "test"
    with pytest.raises(ValueError):
        PeriodicSpline.from_artifact({"kind": "something_else"})


def test_gauss_ic_periodic_and_positive():
    x = np.linspace(0, 1, 101)
    u = gauss_ic(x)
    assert abs(u[0] - u[-1]) < 1e-12
    assert np.all(u > 0)
    assert u[50] == pytest.approx(1.0, abs=1e-4)  # peak at x = 0.5


def test_pso_minimizes_sphere():
    def sphere(p):
        return float(p @ p)

    best, trace = particle_swarm_minimize(
        sphere, dim=4, config=SwarmConfig(particles=30, iterations=80, seed=1)
    )
    assert trace[-1] < 1e-4
    assert np.max(np.abs(best)) < 2e-2


def test_pso_trace_monotone_and_deterministic():
    rng_free = lambda p: float(np.sum((p - 0.3) ** 2)) + 0.1 * math.sin(10 * p[0])
    cfg = SwarmConfig(particles=12, iterations=25, seed=7)
    best1, trace1 = particle_swarm_minimize(rng_free, 3, cfg)
    best2, trace2 = particle_swarm_minimize(rng_free, 3, cfg)
    np.testing.assert_array_equal(best1, best2)
    assert trace1 == trace2
    assert all(b <= a + 1e-15 for a, b in zip(trace1, trace1[1:]))


def test_pso_all_infinite_raises():
    with pytest.raises(RuntimeError, match="unstable"):
        particle_swarm_minimize(lambda p: math.inf, 2,
                                SwarmConfig(particles=5, iterations=3))


def test_swarm_config_validation():
    with pytest.raises(ValueError):
        SwarmConfig(particles=0)
    with pytest.raises(ValueError):
        SwarmConfig(lower=1.0, upper=-1.0)


def test_optimize_ic_reduces_rms_vif():
    """A tiny PSO on a coarse advection setup still improves the VIF."""
    lib = LibrarySpec(max_single_derivative_order=3, max_u_power=2, pad_t=6)
    swarm = SwarmConfig(particles=8, iterations=6, seed=0)
    spl, u0, trace = optimize_ic(FTBS, nx=64, nt=17, cfl=0.01, library_spec=lib,
                                 swarm=swarm, knots=10, degree=8)
    assert len(u0) == 64 and np.all(np.isfinite(u0))
    assert len(trace) == 6
    assert trace[-1] <= trace[0]
    assert np.isfinite(trace[-1])
    # the returned spline reproduces the returned grid samples
    np.testing.assert_allclose(spl(np.arange(64) / 64), u0, atol=1e-12)
