"""Closed-form modified-equation coefficients and accuracy metrics.

The analytic coefficient maps cover the three (PDE, scheme) pairs:
advection/FTBS through O(dx^5), Burgers/MacCormack through O(dx^2) and
KdV/Zabusky-Kruskal through O(dx^4).  Coefficients are expressed on the
u_t = RHS convention, i.e. with signs flipped relative to the "... = 0"
form of the underlying Taylor analysis.

The advection coefficients were re-derived from the scheme's exact
dispersion relation, exp(-i w dt) = 1 - a h (1 - exp(-i kappa dx)):
c_m = dx^(m-1)/h * [z^m] log(1 - a h (1 - e^(-z))).  This derivation
fixes two transcription slips found in commonly quoted expansions: the
dx^3 polynomial ends in 6 a^4 h^3 (not 3 a^4 h^3) and the dx^5
polynomial leads with -a (not -a^5).
"""

import math
import warnings
from dataclasses import dataclass

from .library import TermDescriptor, describe_term

ADVECTION_FTBS = "advection_ftbs"
BURGERS_MACCORMACK = "burgers_maccormack"
KDV_ZABUSKY_KRUSKAL = "kdv_zabusky_kruskal"


def _term(k=0, spatial=(), t=0):
    return TermDescriptor(
        u_power=k, spatial_derivatives=tuple(spatial), time_derivative_order=t
    )


@dataclass(frozen=True)
class AnalyticMDE:
    case_id: str
    coefficients: dict  # TermDescriptor -> float, u_t = RHS convention
    truncation_order_included: int

    def terms(self):
        return set(self.coefficients)

    def names(self):
        return {describe_term(t): v for t, v in self.coefficients.items()}


def analytic_coefficients(case_id, dx, h, a=None) -> AnalyticMDE:
    """Evaluate the closed-form coefficient map at (dx, h = dt/dx, a)."""
    if dx <= 0 or h <= 0:
        raise ValueError("dx and h must be positive")
    if case_id == ADVECTION_FTBS:
        if a is None:
            raise ValueError("advection case requires the advection speed a")
        coeffs = {
            _term(spatial=(1,)): -a,
            _term(spatial=(2,)): -dx * (-a + a**2 * h) / 2.0,
            _term(spatial=(3,)): -dx**2 * (a - 3 * a**2 * h + 2 * a**3 * h**2) / 6.0,
            _term(spatial=(4,)): -dx**3
            * (-a + 7 * a**2 * h - 12 * a**3 * h**2 + 6 * a**4 * h**3)
            / 24.0,
            _term(spatial=(5,)): -dx**4
            * (a - 15 * a**2 * h + 50 * a**3 * h**2 - 60 * a**4 * h**3
               + 24 * a**5 * h**4)
            / 120.0,
            _term(spatial=(6,)): -dx**5
            * (-a + 31 * a**2 * h - 180 * a**3 * h**2 + 390 * a**4 * h**3
               - 360 * a**5 * h**4 + 120 * a**6 * h**5)
            / 720.0,
        }
        return AnalyticMDE(case_id, coeffs, truncation_order_included=5)

    if case_id == BURGERS_MACCORMACK:
        dx2 = dx * dx
        coeffs = {
            _term(k=1, spatial=(1,)): -1.0,
            _term(k=3, spatial=(3,)): dx2 * h**2 / 6.0,
            _term(k=1, spatial=(3,)): -dx2 / 6.0,
            _term(k=2, spatial=(1, 2)): dx2 * h**2,
            _term(k=1, spatial=(1, 2)): -dx2 * h / 2.0,
            _term(k=0, spatial=(1, 2)): -dx2 / 2.0,
            _term(k=1, spatial=(1, 1, 1)): dx2 * h**2 / 2.0,
            _term(k=0, spatial=(1, 1, 1)): -dx2 * h / 4.0,
        }
        return AnalyticMDE(case_id, coeffs, truncation_order_included=2)

    if case_id == KDV_ZABUSKY_KRUSKAL:
        dx2, dx4 = dx * dx, dx**4
        coeffs = {
            _term(k=1, spatial=(1,)): -6.0,
            _term(k=0, spatial=(3,)): -1.0,
            _term(t=3): -dx2 * h**2 / 6.0,
            _term(k=0, spatial=(5,)): -dx2 / 4.0,
            _term(k=1, spatial=(3,)): -dx2,
            _term(k=0, spatial=(1, 2)): -2.0 * dx2,
            _term(t=5): -dx4 * h**4 / 120.0,
            _term(k=0, spatial=(7,)): -dx4 / 40.0,
            _term(k=0, spatial=(2, 3)): -dx4 / 3.0,
            _term(k=0, spatial=(1, 4)): -dx4 / 6.0,
            _term(k=1, spatial=(5,)): -dx4 / 20.0,
        }
        return AnalyticMDE(case_id, coeffs, truncation_order_included=4)

    raise ValueError(f"unknown case {case_id!r}")


def classify_terms(model, truth: AnalyticMDE, terms):
    """Partition the model support by membership in the analytic MDE."""
    correct, incorrect = set(), set()
    for idx in model.support:
        (correct if terms[idx] in truth.coefficients else incorrect).add(idx)
    return correct, incorrect


@dataclass(frozen=True)
class MetricRecord:
    mae: float
    mre: float
    valid: bool  # False when the model contains incorrect terms
    n_correct: int
    n_incorrect: int


def mae_mre(model, truth: AnalyticMDE, terms, coefficients=None) -> MetricRecord:
    """Mean absolute / relative coefficient error over the model's terms.

    Only valid when the model contains no incorrect terms; otherwise the
    record carries valid=False and NaN metrics (never a fake value).
    `coefficients` overrides model.coefficients (e.g. unscaled values).
    """
    xi = model.coefficients if coefficients is None else coefficients
    correct, incorrect = classify_terms(model, truth, terms)
    if incorrect or not model.support:
        return MetricRecord(
            math.nan, math.nan, False, len(correct), len(incorrect)
        )
    abs_errors, rel_errors = [], []
    for idx in model.support:
        true_val = truth.coefficients[terms[idx]]
        err = abs(xi[idx] - true_val)
        abs_errors.append(err)
        rel_errors.append(err / abs(true_val))
    return MetricRecord(
        sum(abs_errors) / len(abs_errors),
        sum(rel_errors) / len(rel_errors),
        True,
        len(correct),
        0,
    )


def empirical_order(coefs_by_dx) -> float:
    """Average pairwise order k from xi ~ O(dx^k) over consecutive pairs.

    Pairs whose coefficients change sign are excluded with a warning.
    """
    entries = sorted(coefs_by_dx, key=lambda e: -e[0])
    if len(entries) < 2:
        raise ValueError("need at least two (dx, coefficient) entries")
    orders = []
    for (dx1, c1), (dx2, c2) in zip(entries, entries[1:]):
        if c1 == 0 or c2 == 0 or (c1 > 0) != (c2 > 0):
            warnings.warn(
                f"sign change or zero coefficient across pair dx={dx1:g},{dx2:g}; "
                "pair excluded from empirical order"
            )
            continue
        orders.append(math.log(c1 / c2) / math.log(dx1 / dx2))
    if not orders:
        raise ValueError("no valid refinement pairs for empirical order")
    return sum(orders) / len(orders)
