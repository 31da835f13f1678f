"""Analytic modified-equation coefficients and accuracy metrics.

The advection coefficients are cross-checked against an independent
rational-arithmetic oracle built from the scheme's exact dispersion
relation: with q = a*h, the symbol of one update step is
1 - q*(1 - e^(-z)) where z = i*kappa*dx, so the modified equation follows
from the coefficients of log(1 - q*(1 - e^(-z))) as a power series in z,
computed here exactly over Fractions.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from mdefind import oracle
from mdefind.library import TermDescriptor
from mdefind.oracle import (
    ADVECTION_FTBS,
    BURGERS_MACCORMACK,
    KDV_ZABUSKY_KRUSKAL,
    analytic_coefficients,
    classify_terms,
    empirical_order,
    mae_mre,
)
from mdefind.regress import SparseModel


def _series_mul(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > order:
                break
            out[i + j] += ai * bj
    return out


def _log_series(f, order):
    """log(f) for a series with f[0] == 1, via term-by-term integration."""
    assert f[0] == 1
    # derivative of log f is f'/f; build 1/f first
    inv = [Fraction(0)] * (order + 1)
    inv[0] = Fraction(1)
    for n in range(1, order + 1):
        inv[n] = -sum(f[k] * inv[n - k] for k in range(1, n + 1))
    fprime = [(k + 1) * f[k + 1] for k in range(order)] + [Fraction(0)]
    dlog = _series_mul(fprime, inv, order)
    return [Fraction(0)] + [dlog[n - 1] / n for n in range(1, order + 1)]


def dispersion_oracle(a, h, dx, m, order=8):
    """Exact coefficient of d^m u/dx^m in the FTBS modified equation."""
    q = Fraction(a) * Fraction(h)
    # e^(-z) - 1 as a series in z
    em1 = [Fraction(0)] + [Fraction((-1) ** n, math.factorial(n))
                           for n in range(1, order + 1)]
    symbol = [Fraction(1)] + [q * c for c in em1[1:]]
    log_sym = _log_series(symbol, order)
    # u_t = sum_m c_m u_{mx} with c_m = dx^(m-1)/h * m! [z^m] log / m!
    # The z^m coefficient multiplies kappa^m (i)^m; matching d^m/dx^m
    # contributes the same i^m, so the rational coefficient carries over.
    return float(log_sym[m]) * dx ** (m - 1) / h * math.factorial(m) / math.factorial(m)


@pytest.mark.parametrize("a,h", [(1.0, 0.01), (1.3, 0.2), (0.7, 0.9)])
def test_advection_matches_dispersion_series(a, h):
    dx = 1.0 / 300
    truth = analytic_coefficients(ADVECTION_FTBS, dx, h, a=a)
    by_order = {
        t.spatial_derivatives[0]: v for t, v in truth.coefficients.items()
    }
    for m in range(1, 7):
        expected = dispersion_oracle(a, h, dx, m)
        assert by_order[m] == pytest.approx(expected, rel=1e-13), m


def test_advection_known_values_unit_cfl_limit():
    """At a*h = 1 FTBS is exact: every truncation coefficient vanishes."""
    truth = analytic_coefficients(ADVECTION_FTBS, 0.01, 1.0, a=1.0)
    for term, value in truth.coefficients.items():
        if term.spatial_derivatives == (1,):
            assert value == -1.0
        else:
            assert value == pytest.approx(0.0, abs=1e-15)


def test_advection_leading_coefficients():
    dx, h, a = 0.01, 0.3, 2.0
    truth = analytic_coefficients(ADVECTION_FTBS, dx, h, a=a)
    t2 = TermDescriptor(spatial_derivatives=(2,))
    assert truth.coefficients[t2] == pytest.approx(
        0.5 * a * dx * (1.0 - a * h), rel=1e-14
    )


def test_burgers_coefficient_values():
    dx, h = 1e-4, 2.4
    truth = analytic_coefficients(BURGERS_MACCORMACK, dx, h)
    names = truth.names()
    assert len(names) == 8
    assert names["u*u_x"] == -1.0
    assert names["u^3*u_xxx"] == pytest.approx(dx**2 * h**2 / 6.0)
    assert names["u*u_xxx"] == pytest.approx(-dx**2 / 6.0)
    assert names["u^2*u_x*u_xx"] == pytest.approx(dx**2 * h**2)
    assert names["u_x*u_xx"] == pytest.approx(-dx**2 / 2.0)
    assert names["u*u_x*u_x*u_x"] == pytest.approx(dx**2 * h**2 / 2.0)
    assert names["u_x*u_x*u_x"] == pytest.approx(-dx**2 * h / 4.0)


def test_kdv_coefficient_values():
    dx, h = 0.01, 1e-4
    truth = analytic_coefficients(KDV_ZABUSKY_KRUSKAL, dx, h)
    names = truth.names()
    assert len(names) == 11
    assert names["u*u_x"] == -6.0
    assert names["u_xxx"] == -1.0
    assert names["u_ttt"] == pytest.approx(-dx**2 * h**2 / 6.0)
    assert names["u_xxxxx"] == pytest.approx(-dx**2 / 4.0)
    assert names["u_xxxxxxx"] == pytest.approx(-dx**4 / 40.0)
    assert names["u_ttttt"] == pytest.approx(-dx**4 * h**4 / 120.0)


def test_analytic_coefficients_validation():
    with pytest.raises(ValueError):
        analytic_coefficients(ADVECTION_FTBS, -0.1, 0.1, a=1.0)
    with pytest.raises(ValueError):
        analytic_coefficients(ADVECTION_FTBS, 0.1, 0.1)  # missing a
    with pytest.raises(ValueError):
        analytic_coefficients("unknown", 0.1, 0.1)


def _model(support, coefs, p=6):
    xi = np.zeros(p)
    for i, c in zip(support, coefs):
        xi[i] = c
    return SparseModel(support=tuple(support), coefficients=xi,
                       hyperparameters={}, residual_norm=0.0)


def test_classify_and_metrics():
    dx, h, a = 0.01, 0.5, 1.0
    truth = analytic_coefficients(ADVECTION_FTBS, dx, h, a=a)
    terms = [
        TermDescriptor(is_intercept=True),
        TermDescriptor(spatial_derivatives=(1,)),
        TermDescriptor(spatial_derivatives=(2,)),
        TermDescriptor(u_power=1),
    ]
    c1 = truth.coefficients[terms[1]]
    c2 = truth.coefficients[terms[2]]
    good = _model((1, 2), (c1 * 1.01, c2), p=4)
    rec = mae_mre(good, truth, terms)
    assert rec.valid and rec.n_correct == 2 and rec.n_incorrect == 0
    assert rec.mre == pytest.approx(0.005, rel=1e-10)
    assert rec.mae == pytest.approx(abs(0.01 * c1) / 2.0, rel=1e-10)

    bad = _model((1, 3), (c1, 0.2), p=4)
    correct, incorrect = classify_terms(bad, truth, terms)
    assert correct == {1} and incorrect == {3}
    rec_bad = mae_mre(bad, truth, terms)
    assert not rec_bad.valid and math.isnan(rec_bad.mre)


def test_empirical_order_exact_power_law():
    series = [(dx, 3.0 * dx**2) for dx in (0.1, 0.05, 0.025, 0.0125)]
    assert empirical_order(series) == pytest.approx(2.0, abs=1e-12)


def test_empirical_order_excludes_sign_changes():
    series = [(0.1, 1.0), (0.05, -0.25), (0.025, -0.0625)]
    with pytest.warns(UserWarning, match="sign change"):
        got = empirical_order(series)
    assert got == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        empirical_order([(0.1, 1.0)])
    with pytest.raises(ValueError), pytest.warns(UserWarning):
        empirical_order([(0.1, 1.0), (0.05, -1.0)])
