"""BIC model scoring on an independent test simulation and model selection.

BIC = -(n_eff / 2) * log(test RSS) - (k / 2) * log(n_eff), where n_eff is
an effective sample size (default: the spatial resolution nx).  Models
must carry coefficients from an OLS refit on the scaled-only (never
puffered) training system; the trained coefficients are applied to the
test system without refitting.
"""

import math
from dataclasses import dataclass

import numpy as np

from .library import CandidateLibrary
from .oracle import AnalyticMDE, classify_terms

RESIDUAL_FLOOR = 1e-300


@dataclass
class ModelScore:
    model: object
    bic: float
    n_eff: int
    test_residual_sq: float

    @property
    def k(self) -> int:
        return self.model.k


def bic_score(model, test_library: CandidateLibrary, n_eff: int,
              physical_coefficients=None) -> ModelScore:
    """Score one model on the test system with its trained coefficients.

    `physical_coefficients` are the unscaled coefficients aligned to the
    test library's term order; they default to model.coefficients.
    """
    if n_eff < 1:
        raise ValueError("n_eff must be positive")
    xi = model.coefficients if physical_coefficients is None else physical_coefficients
    residual = test_library.theta @ xi - test_library.target
    rss = max(float(residual @ residual), RESIDUAL_FLOOR)
    bic = -0.5 * n_eff * math.log(rss) - 0.5 * model.k * math.log(n_eff)
    return ModelScore(model=model, bic=bic, n_eff=n_eff, test_residual_sq=rss)


def select_best(scores) -> ModelScore:
    """BIC maximizer; ties broken by smaller k, then smaller test residual."""
    scores = list(scores)
    if not scores:
        raise ValueError("empty score list")
    return max(scores, key=lambda s: (s.bic, -s.k, -s.test_residual_sq))


def optimal_choice(models, truth: AnalyticMDE, terms):
    """Oracle baseline: most correct terms subject to zero incorrect terms.

    Returns (model, n_correct) or (None, 0) when every candidate contains
    at least one incorrect term.
    """
    best, best_key = None, None
    for model in models:
        correct, incorrect = classify_terms(model, truth, terms)
        if incorrect:
            continue
        key = (len(correct), -model.residual_norm)
        if best_key is None or key > best_key:
            best, best_key = model, key
    if best is None:
        return None, 0
    return best, best_key[0]
