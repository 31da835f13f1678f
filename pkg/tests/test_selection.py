"""BIC scoring on the test system and oracle-baseline model choice."""

import math

import numpy as np
import pytest

from mdefind.grid import Grid1D, SolutionField
from mdefind.library import LibrarySpec, TermDescriptor, build_library
from mdefind.oracle import ADVECTION_FTBS, analytic_coefficients
from mdefind.regress import SparseModel
from mdefind.selection import bic_score, optimal_choice, select_best


def tiny_library(seed=0):
    rng = np.random.default_rng(seed)
    nx, nt = 24, 17
    x = np.arange(nx) / nx
    values = np.array([np.sin(2 * np.pi * (x - 0.001 * j))
                       + 0.01 * rng.normal(size=nx) for j in range(nt)])
    field = SolutionField(grid=Grid1D(nx=nx, nt=nt, dt=1e-3), values=values,
                          scheme_id="test")
    return build_library(field, LibrarySpec(max_single_derivative_order=2,
                                            max_u_power=1, pad_t=6))


def model(support, k_total, coefs=None, residual=0.0):
    xi = np.zeros(k_total)
    if coefs is not None:
        for i, c in zip(support, coefs):
            xi[i] = c
    return SparseModel(support=tuple(support), coefficients=xi,
                       hyperparameters={}, residual_norm=residual)


def test_bic_formula_matches_definition():
    lib = tiny_library()
    p = lib.p
    xi = np.linspace(-0.5, 0.5, p)
    m = model(tuple(range(p)), p, coefs=xi)
    n_eff = 24
    score = bic_score(m, lib, n_eff, physical_coefficients=xi)
    rss = float(np.sum((lib.theta @ xi - lib.target) ** 2))
    assert score.test_residual_sq == pytest.approx(rss, rel=1e-12)
    expected = -0.5 * n_eff * math.log(rss) - 0.5 * p * math.log(n_eff)
    assert score.bic == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        bic_score(m, lib, 0)


def test_bic_residual_floor_prevents_log_of_zero():
    lib = tiny_library()
    # make the target exactly representable so RSS would be 0
    lib.target[:] = lib.theta[:, 1] * 2.0
    xi = np.zeros(lib.p)
    xi[1] = 2.0
    score = bic_score(model((1,), lib.p, coefs=[2.0]), lib, 24,
                      physical_coefficients=xi)
    assert math.isfinite(score.bic)
    assert score.test_residual_sq >= 1e-300


def test_select_best_prefers_high_bic_then_small_k():
    lib = tiny_library()
    xi = np.zeros(lib.p)
    s1 = bic_score(model((0,), lib.p), lib, 24, physical_coefficients=xi)
    s2 = bic_score(model((0, 1), lib.p), lib, 24, physical_coefficients=xi)
    # identical residuals: the smaller model pays less complexity penalty
    assert s1.bic > s2.bic
    assert select_best([s2, s1]) is s1
    with pytest.raises(ValueError):
        select_best([])


def test_select_best_tie_breaks_on_k():
    lib = tiny_library()
    xi = np.zeros(lib.p)
    a = bic_score(model((0,), lib.p), lib, 24, physical_coefficients=xi)
    b = bic_score(model((0, 1), lib.p), lib, 24, physical_coefficients=xi)
    b.bic = a.bic  # force a tie
    assert select_best([b, a]) is a


def test_optimal_choice_most_correct_no_incorrect():
    truth = analytic_coefficients(ADVECTION_FTBS, 0.01, 0.5, a=1.0)
    terms = [
        TermDescriptor(is_intercept=True),
        TermDescriptor(spatial_derivatives=(1,)),
        TermDescriptor(spatial_derivatives=(2,)),
        TermDescriptor(u_power=1),
    ]
    only_one = model((1,), 4, residual=1.0)
    two_correct = model((1, 2), 4, residual=0.5)
    with_incorrect = model((1, 2, 3), 4, residual=0.1)
    best, n_correct = optimal_choice(
        [only_one, two_correct, with_incorrect], truth, terms
    )
    assert best is two_correct and n_correct == 2
    # all candidates polluted: explicit None, never a fake choice
    best, n_correct = optimal_choice([with_incorrect], truth, terms)
    assert best is None and n_correct == 0


def test_optimal_choice_ties_prefer_smaller_residual():
    truth = analytic_coefficients(ADVECTION_FTBS, 0.01, 0.5, a=1.0)
    terms = [TermDescriptor(spatial_derivatives=(1,)),
             TermDescriptor(spatial_derivatives=(2,))]
    worse = model((0, 1), 2, residual=2.0)
    better = model((0, 1), 2, residual=1.0)
    best, _ = optimal_choice([worse, better], truth, terms)
    assert best is better
