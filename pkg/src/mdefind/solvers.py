"""Finite-difference solvers on a periodic 1-D grid.

Three schemes generate the simulation data:

* FTBS (forward-time backward-space) for the linear advection equation
  u_t + a u_x = 0.
* MacCormack predictor-corrector for the inviscid Burgers' equation
  u_t + (u^2/2)_x = 0.
* Zabusky-Kruskal leapfrog for the KdV equation u_t + 6 u u_x + u_xxx = 0,
  with an uncentered half-weighted first step.

Each scheme can be verified by the method of manufactured solutions: a
closed-form forcing is added so that u(x, t) = sin(2*pi*(x + t)) + 0.001
satisfies the forced PDE exactly.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import BlowUpError, Grid1D, SolutionField

FTBS = "ftbs"
MACCORMACK = "maccormack"
ZABUSKY_KRUSKAL = "zabusky_kruskal"
SCHEMES = (FTBS, MACCORMACK, ZABUSKY_KRUSKAL)

ZK_STABILITY_BOUND = 2.0 / (3.0 * math.sqrt(3.0))


def _check_finite(u, what="input"):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError(f"non-finite values in {what}")
    return u


def ftbs_step(u, a, h):
    """One FTBS update: u_i <- u_i - a*h*(u_i - u_{i-1}), periodic."""
    u = _check_finite(u)
    if a * h > 1.0:
        warnings.warn(f"FTBS CFL {a * h:.3g} exceeds 1; scheme is unstable")
    return u - a * h * (u - np.roll(u, 1))


def _forward_flux_diff(u):
    """(u_{i+1}^2 - u_i^2) / 2 with periodic wrap."""
    usq = u * u
    return (np.roll(usq, -1) - usq) / 2.0


def _backward_flux_diff(u):
    """(u_i^2 - u_{i-1}^2) / 2 with periodic wrap."""
    usq = u * u
    return (usq - np.roll(usq, 1)) / 2.0


def maccormack_step(u, h, dt=None, source_now=None, source_next=None):
    """One MacCormack predictor-corrector update for Burgers' equation.

    Optional forcing terms (for manufactured solutions) enter the predictor
    at the current time level and the corrector at the next level, which
    preserves second-order accuracy.
    """
    u = _check_finite(u)
    cfl = np.max(np.abs(u)) * h
    if cfl > 1.0:
        warnings.warn(f"MacCormack CFL {cfl:.3g} exceeds 1; scheme is unstable")
    predictor = u - h * _forward_flux_diff(u)
    if source_now is not None:
        predictor = predictor + dt * source_now
    corrected = 0.5 * (u + predictor - h * _backward_flux_diff(predictor))
    if source_next is not None:
        corrected = corrected + 0.5 * dt * source_next
    return corrected


def maccormack_step_single_equation(u, h, dx):
    """Single-equation rewrite of the MacCormack update.

    Algebraically equivalent to :func:`maccormack_step`; kept as an
    independent cross-check of the predictor-corrector implementation.
    """
    u = _check_finite(u)
    dt = h * dx
    usq = u * u
    up, um = np.roll(usq, -1), np.roll(usq, 1)
    uprev = np.roll(u, 1)
    central = (up - um) / (4.0 * dx)
    second = (up - 2.0 * usq + um) / (2.0 * dx * dx)
    rhs = (
        central
        - dt / 2.0 * ((u + uprev) / 2.0 * second + (u - uprev) / dx * central)
        + dt * dt / 2.0 * central * second
    )
    return u - dt * rhs


def _zk_differences(u, h, dx):
    nonlinear = (np.roll(u, -1) + u + np.roll(u, 1)) * (np.roll(u, -1) - np.roll(u, 1))
    third = np.roll(u, -2) - 2.0 * np.roll(u, -1) + 2.0 * np.roll(u, 1) - np.roll(u, 2)
    return h * nonlinear, (h / dx**2) * third


def zk_stability_measure(u, h, dx):
    """Left-hand side of the Zabusky-Kruskal linear stability criterion."""
    return h * abs(-2.0 * np.max(np.abs(u)) + 1.0 / dx**2)


def zabusky_kruskal_step(u_prev, u_curr, h, dx):
    """Leapfrog Zabusky-Kruskal update for KdV from two prior time levels."""
    u_prev = _check_finite(u_prev, "u_prev")
    u_curr = _check_finite(u_curr, "u_curr")
    if zk_stability_measure(u_curr, h, dx) > ZK_STABILITY_BOUND:
        warnings.warn("Zabusky-Kruskal stability criterion violated")
    nonlinear, third = _zk_differences(u_curr, h, dx)
    return u_prev - 2.0 * nonlinear - third


def zabusky_kruskal_first_step(u0, h, dx):
    """Uncentered (half-weighted) starter step used at the first time level."""
    u0 = _check_finite(u0)
    nonlinear, third = _zk_differences(u0, h, dx)
    return u0 - nonlinear - 0.5 * third


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact solution plus the forcing making it satisfy the forced PDE."""

    exact_solution: Callable[[np.ndarray, float], np.ndarray]
    source_term: Callable[[np.ndarray, float], np.ndarray]


def manufactured_case(scheme_id, a=1.0) -> ManufacturedCase:
    """Manufactured solution sin(2*pi*(x+t)) + 0.001 with closed-form forcing."""
    two_pi = 2.0 * math.pi

    def exact(x, t):
        return np.sin(two_pi * (x + t)) + 0.001

    if scheme_id == FTBS:
        # u_t + a u_x = (1 + a) * 2*pi*cos(2*pi*(x+t))
        def source(x, t):
            return (1.0 + a) * two_pi * np.cos(two_pi * (x + t))

    elif scheme_id == MACCORMACK:
        # u_t + u u_x = 2*pi*cos(.)*(1 + sin(.) + 0.001)
        def source(x, t):
            theta = two_pi * (x + t)
            return two_pi * np.cos(theta) * (1.0 + np.sin(theta) + 0.001)

    elif scheme_id == ZABUSKY_KRUSKAL:
        # u_t + 6 u u_x + u_xxx
        def source(x, t):
            theta = two_pi * (x + t)
            cos = np.cos(theta)
            return (
                two_pi * cos * (1.0 + 6.0 * (np.sin(theta) + 0.001))
                - two_pi**3 * cos
            )

    else:
        raise ValueError(f"unknown scheme {scheme_id!r}")
    return ManufacturedCase(exact, source)


def dt_from_cfl(scheme_id, cfl, dx, u0=None, a=1.0):
    """Time step size from the scheme's CFL definition.

    Advection uses a*dt/dx; Burgers and KdV use the advective definition
    max|u0|*dt/dx (the KdV linear stability bound is checked separately).
    """
    if cfl <= 0:
        raise ValueError("cfl must be positive")
    if scheme_id == FTBS:
        return cfl * dx / abs(a)
    umax = np.max(np.abs(u0))
    if umax == 0:
        raise ValueError("cannot derive dt from CFL for an identically zero IC")
    return cfl * dx / umax


def run_simulation(
    scheme_id,
    u0,
    grid: Grid1D,
    a: float = 1.0,
    mms: Optional[ManufacturedCase] = None,
    store: bool = True,
):
    """Advance u0 for grid.nt stored levels (including the IC).

    With a manufactured case, the discrete source term is added at every
    step so the exact solution is tracked.  Blow-up aborts with the step
    index.  With ``store=False`` only the final level is returned (used by
    long manufactured-solution runs).
    """
    u0 = _check_finite(np.asarray(u0, dtype=float), "initial condition")
    if len(u0) != grid.nx:
        raise ValueError(f"u0 length {len(u0)} != nx {grid.nx}")
    dx, dt, h = grid.dx, grid.dt, grid.h
    x = grid.x
    source = mms.source_term if mms is not None else None

    if scheme_id == FTBS:
        cfl = a * h
    elif scheme_id == MACCORMACK:
        cfl = np.max(np.abs(u0)) * h
    elif scheme_id == ZABUSKY_KRUSKAL:
        cfl = np.max(np.abs(u0)) * h
    else:
        raise ValueError(f"unknown scheme {scheme_id!r}")

    levels = np.empty((grid.nt, grid.nx)) if store else None
    if store:
        levels[0] = u0

    u_prev = None
    u = u0
    with warnings.catch_warnings():
        warnings.simplefilter("once")
        for j in range(1, grid.nt):
            t_now = (j - 1) * dt
            if scheme_id == FTBS:
                u_next = ftbs_step(u, a, h)
                if source is not None:
                    u_next = u_next + dt * source(x, t_now)
            elif scheme_id == MACCORMACK:
                if source is not None:
                    u_next = maccormack_step(
                        u, h, dt=dt,
                        source_now=source(x, t_now),
                        source_next=source(x, t_now + dt),
                    )
                else:
                    u_next = maccormack_step(u, h)
            else:
                if u_prev is None:
                    u_next = zabusky_kruskal_first_step(u, h, dx)
                    if source is not None:
                        u_next = u_next + dt * source(x, t_now)
                else:
                    u_next = zabusky_kruskal_step(u_prev, u, h, dx)
                    if source is not None:
                        u_next = u_next + 2.0 * dt * source(x, t_now)
            if not np.all(np.isfinite(u_next)):
                raise BlowUpError(j)
            u_prev = u
            u = u_next
            if store:
                levels[j] = u

    if not store:
        return u
    return SolutionField(grid=grid, values=levels, scheme_id=scheme_id, cfl=cfl)


def mms_convergence(scheme_id, resolutions, cfl, a=1.0, t_test=None):
    """Manufactured-solution refinement study.

    Returns one record per resolution with L2 / Linf errors at t_test and
    the pairwise empirical order (log-ratio of L2 errors) against the
    previous resolution.  Unstable runs are recorded as failures.
    """
    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions")
    if t_test is None:
        t_test = 1e-8 if scheme_id == ZABUSKY_KRUSKAL else 0.1
    case = manufactured_case(scheme_id, a=a)
    records = []
    for nx in resolutions:
        dx = 1.0 / nx
        x = np.arange(nx) * dx
        u0 = case.exact_solution(x, 0.0)
        dt_raw = dt_from_cfl(scheme_id, cfl, dx, u0=u0, a=a)
        nsteps = max(1, math.ceil(t_test / dt_raw))
        dt = t_test / nsteps
        grid = Grid1D(nx=nx, nt=nsteps + 1, dt=dt)
        record = {"nx": nx, "failed": False, "l2": math.nan, "linf": math.nan,
                  "pairwise_order": math.nan}
        try:
            u_end = run_simulation(scheme_id, u0, grid, a=a, mms=case, store=False)
            err = u_end - case.exact_solution(x, t_test)
            record["l2"] = float(np.sqrt(np.mean(err**2)))
            record["linf"] = float(np.max(np.abs(err)))
        except BlowUpError:
            record["failed"] = True
        prev = records[-1] if records else None
        if prev and not record["failed"] and not prev["failed"] and record["l2"] > 0:
            record["pairwise_order"] = math.log(prev["l2"] / record["l2"]) / math.log(
                nx / prev["nx"]
            )
        records.append(record)
    return records
