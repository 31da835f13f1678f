"""Initial-condition parametrization and optimization.

The optimized initial condition is a uniform periodic B-spline of high
degree whose control values are tuned by a global-best particle swarm to
minimize the RMS-VIF of the resulting candidate library.  A fixed sum of
Gaussian bells (with periodic image terms) serves as the baseline IC.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .grid import BlowUpError, Grid1D
from .library import LibrarySpec, build_library
from .precondition import library_rms_vif
from .solvers import dt_from_cfl, run_simulation


@dataclass(frozen=True)
class PeriodicSpline:
    """Uniform B-spline on [0, 1) made exactly periodic by wrapped coefficients."""

    control_values: np.ndarray
    degree: int = 8

    def __post_init__(self):
        phi = np.asarray(self.control_values, dtype=float)
        object.__setattr__(self, "control_values", phi)
        if len(phi) <= self.degree:
            raise ValueError(
                f"need more control values ({len(phi)}) than degree ({self.degree})"
            )

    @property
    def knot_count(self) -> int:
        return len(self.control_values)

    def _bspline(self) -> BSpline:
        m, k = self.knot_count, self.degree
        knots = np.arange(-k, m + k + 1) / m
        coeffs = self.control_values[np.arange(m + k) % m]
        return BSpline(knots, coeffs, k, extrapolate=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._bspline()(np.mod(x, 1.0))

    def to_artifact(self) -> dict:
        return {
            "kind": "periodic_bspline",
            "degree": self.degree,
            "knots": self.knot_count,
            "control_values": self.control_values.tolist(),
        }

    @classmethod
    def from_artifact(cls, data: dict) -> "PeriodicSpline":
        if data.get("kind") != "periodic_bspline":
            raise ValueError("not a periodic_bspline artifact")
        return cls(np.asarray(data["control_values"], dtype=float), data["degree"])


def save_ic_artifact(path, spline: PeriodicSpline, seed=None, extra=None):
    payload = spline.to_artifact()
    if seed is not None:
        payload["seed"] = seed
    payload.update(extra or {})
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def load_ic_artifact(path) -> PeriodicSpline:
    with open(path) as fh:
        return PeriodicSpline.from_artifact(json.load(fh))


def gauss_ic(x):
    """Gaussian bell with periodic image terms; u(0) == u(1)."""
    x = np.asarray(x, dtype=float)
    return (
        np.exp(-50.0 * (x - 0.5) ** 2)
        + np.exp(-50.0 * (x + 0.5) ** 2)
        + np.exp(-50.0 * (x - 1.5) ** 2)
    )


@dataclass(frozen=True)
class SwarmConfig:
    particles: int = 50
    iterations: int = 100
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    seed: int = 0
    lower: float = -1.0
    upper: float = 1.0

    def __post_init__(self):
        if self.particles < 1 or self.iterations < 1:
            raise ValueError("particles and iterations must be positive")
        if not self.upper > self.lower:
            raise ValueError("invalid search bounds")


def particle_swarm_minimize(fitness, dim, config: SwarmConfig):
    """Global-best PSO over a box; returns (best position, gbest trace).

    Fitness evaluations may fail by returning +inf; the trace records the
    global best after every iteration and is monotone non-increasing.
    """
    rng = np.random.default_rng(config.seed)
    span = config.upper - config.lower
    pos = rng.uniform(config.lower, config.upper, size=(config.particles, dim))
    vel = np.zeros_like(pos)

    def evaluate(points):
        return np.array([fitness(p) for p in points])

    pbest = pos.copy()
    pbest_val = evaluate(pos)
    if not np.any(np.isfinite(pbest_val)):
        raise RuntimeError("all initial particles produced unstable simulations")
    g = int(np.argmin(pbest_val))
    gbest, gbest_val = pbest[g].copy(), float(pbest_val[g])

    trace = []
    for _ in range(config.iterations):
        r1 = rng.random(pos.shape)
        r2 = rng.random(pos.shape)
        vel = (
            config.inertia * vel
            + config.cognitive * r1 * (pbest - pos)
            + config.social * r2 * (gbest - pos)
        )
        np.clip(vel, -span, span, out=vel)
        pos = np.clip(pos + vel, config.lower, config.upper)
        values = evaluate(pos)
        improved = values < pbest_val
        pbest[improved] = pos[improved]
        pbest_val[improved] = values[improved]
        g = int(np.argmin(pbest_val))
        if pbest_val[g] < gbest_val:
            gbest, gbest_val = pbest[g].copy(), float(pbest_val[g])
        trace.append(gbest_val)
    return gbest, trace


def optimize_ic(
    scheme_id,
    nx,
    nt,
    cfl,
    library_spec: LibrarySpec,
    swarm: SwarmConfig,
    knots: int = 15,
    degree: int = 8,
    a: float = 1.0,
):
    """Optimize the IC control values to minimize library RMS-VIF.

    Each candidate: spline -> u(x, 0) -> forward solve -> library ->
    RMS-VIF.  Unstable or non-finite candidates receive +inf fitness.
    Returns (spline, u0 on the grid, gbest trace).
    """
    x = np.arange(nx) / nx
    dx = 1.0 / nx

    def fitness(phi):
        try:
            u0 = PeriodicSpline(phi, degree)(x)
            if not np.all(np.isfinite(u0)) or np.max(np.abs(u0)) < 1e-12:
                return math.inf
            dt = dt_from_cfl(scheme_id, cfl, dx, u0=u0, a=a)
            grid = Grid1D(nx=nx, nt=nt, dt=dt)
            fld = run_simulation(scheme_id, u0, grid, a=a)
            lib = build_library(fld, library_spec)
            return library_rms_vif(lib)
        except (BlowUpError, ValueError, FloatingPointError):
            return math.inf

    best_phi, trace = particle_swarm_minimize(fitness, knots, swarm)
    spline = PeriodicSpline(best_phi, degree)
    return spline, spline(x), trace
