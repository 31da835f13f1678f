"""Sparse linear regression suite: OLS, ridge, Lasso, STRidge, SR3 (L0), FoBa.

All algorithms operate on a design matrix with (ideally) unit-norm columns
and produce SparseModel records; sweep drivers iterate hyperparameter
grids and deduplicate the resulting supports, keeping the best-fitting
model per support.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve


@dataclass
class SparseModel:
    support: tuple  # ordered term indices
    coefficients: np.ndarray  # length p, exactly zero off support
    hyperparameters: dict
    residual_norm: float  # ||theta @ xi - target||_2 on the fitted system
    refit_ols: bool = False
    converged: bool = True
    rank_deficient: bool = False

    @property
    def k(self) -> int:
        return len(self.support)


@dataclass
class SweepResult:
    algorithm_id: str
    models: list
    sweep_grid: dict = field(default_factory=dict)


def _dedup(models):
    """Keep, per (support, refit flavor), the model with the smallest residual."""
    best = {}
    for m in models:
        key = (m.support, m.refit_ols)
        if key not in best or m.residual_norm < best[key].residual_norm:
            best[key] = m
    return sorted(best.values(), key=lambda m: (m.k, m.support, not m.refit_ols))


def ols(theta, target):
    """Least-squares solution via SVD (never normal equations on raw theta)."""
    coef, _, rank, _ = np.linalg.lstsq(theta, target, rcond=None)
    return coef


def _residual_norm(theta, target, coef):
    return float(np.linalg.norm(theta @ coef - target))


def refit_on_support(theta, target, support, hyperparameters=None, converged=True):
    """OLS refit restricted to a support set, packaged as a SparseModel."""
    support = tuple(sorted(support))
    p = theta.shape[1]
    coefficients = np.zeros(p)
    rank_deficient = False
    if support:
        sub = theta[:, list(support)]
        coef, _, rank, _ = np.linalg.lstsq(sub, target, rcond=None)
        rank_deficient = rank < len(support)
        coefficients[list(support)] = coef
        residual = _residual_norm(sub, target, coef)
    else:
        residual = float(np.linalg.norm(target))
    return SparseModel(
        support=support,
        coefficients=coefficients,
        hyperparameters=dict(hyperparameters or {}),
        residual_norm=residual,
        refit_ols=True,
        converged=converged,
        rank_deficient=rank_deficient,
    )


def ridge(theta, target, lam):
    """Minimizer of 0.5*||theta xi - target||^2 + lam*||xi||^2."""
    if lam < 0:
        raise ValueError("ridge penalty must be non-negative")
    if lam == 0:
        return ols(theta, target)
    p = theta.shape[1]
    gram = theta.T @ theta + 2.0 * lam * np.eye(p)
    return np.linalg.solve(gram, theta.T @ target)


def _check_unit_columns(theta):
    norms = np.linalg.norm(theta, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        warnings.warn("design matrix columns are not unit-norm; "
                      "sparse regression penalties assume scaled columns")


def lasso(theta, target, lam, max_iter=10000, tol=1e-12):
    """Cyclic coordinate descent for 0.5*||theta xi - y||^2 + lam*sum|xi_i|.

    Uses covariance (Gram) updates; returns (coefficients, converged).
    """
    if lam == 0:
        return ols(theta, target), True
    gram = theta.T @ theta
    b = theta.T @ target
    diag = np.diag(gram)
    p = theta.shape[1]
    xi = np.zeros(p)
    grad = b.copy()  # b - gram @ xi, maintained incrementally
    for _ in range(max_iter):
        max_change = 0.0
        for j in range(p):
            old = xi[j]
            rho = grad[j] + diag[j] * old
            new = np.sign(rho) * max(abs(rho) - lam, 0.0) / diag[j]
            if new != old:
                grad -= gram[:, j] * (new - old)
                xi[j] = new
                max_change = max(max_change, abs(new - old))
        if max_change <= tol * (1.0 + np.max(np.abs(xi))):
            return xi, True
    return xi, False


def lasso_sweep(theta, target, lam_grid, max_iter=10000, tol=1e-12):
    """One Lasso fit per penalty; raw and OLS-refit variants are both kept."""
    _check_unit_columns(theta)
    models = []
    for lam in lam_grid:
        xi, converged = lasso(theta, target, lam, max_iter=max_iter, tol=tol)
        support = tuple(np.flatnonzero(xi != 0.0))
        hp = {"lambda": float(lam)}
        models.append(
            SparseModel(
                support=support,
                coefficients=xi,
                hyperparameters=hp,
                residual_norm=_residual_norm(theta, target, xi),
                refit_ols=False,
                converged=converged,
            )
        )
        models.append(refit_on_support(theta, target, support, hp, converged))
    return SweepResult("lasso", _dedup(models), {"lambda": list(lam_grid)})


def stridge(theta, target, lam, tol, max_iter=100):
    """Sequentially thresholded ridge: iterate ridge fit / hard threshold."""
    p = theta.shape[1]
    active = np.arange(p)
    for _ in range(max_iter):
        coef = ridge(theta[:, active], target, lam)
        keep = np.abs(coef) >= tol
        if np.all(keep):
            break
        active = active[keep]
        if len(active) == 0:
            break
    return tuple(active)


def stridge_sweep(theta, target, lam_grid, tol_grid):
    """STRidge over a (lambda, tol) grid; final coefficients are OLS refits."""
    models = []
    for lam in lam_grid:
        for tol in tol_grid:
            support = stridge(theta, target, lam, tol)
            hp = {"lambda": float(lam), "tol": float(tol)}
            models.append(refit_on_support(theta, target, support, hp))
    return SweepResult(
        "stridge", _dedup(models),
        {"lambda": list(lam_grid), "tol": list(tol_grid)},
    )


def sr3(theta, target, lam, gamma, max_iter=10000, tol=1e-12):
    """Relaxed L0 regression by alternating minimization.

    xi-update solves (theta^T theta + gamma I) xi = theta^T y + gamma w;
    w-update hard-thresholds xi at sqrt(2*lam/gamma).
    Returns (w, converged).
    """
    if gamma <= 0:
        raise ValueError("relaxation parameter gamma must be positive")
    p = theta.shape[1]
    gram = theta.T @ theta
    b = theta.T @ target
    factor = cho_factor(gram + gamma * np.eye(p))
    threshold = np.sqrt(2.0 * lam / gamma)
    w = np.zeros(p)
    for _ in range(max_iter):
        xi = cho_solve(factor, b + gamma * w)
        w_new = np.where(np.abs(xi) >= threshold, xi, 0.0)
        if np.max(np.abs(w_new - w)) <= tol * (1.0 + np.max(np.abs(w_new))):
            return w_new, True
        w = w_new
    return w, False


def sr3_sweep(theta, target, lam_grid, gamma_grid, max_iter=10000):
    """SR3 over (lambda, gamma); models are OLS refits on w's support."""
    models = []
    for gamma in gamma_grid:
        for lam in lam_grid:
            w, converged = sr3(theta, target, lam, gamma, max_iter=max_iter)
            support = tuple(np.flatnonzero(w != 0.0))
            hp = {"lambda": float(lam), "gamma": float(gamma)}
            models.append(refit_on_support(theta, target, support, hp, converged))
    return SweepResult(
        "sr3", _dedup(models),
        {"lambda": list(lam_grid), "gamma": list(gamma_grid)},
    )


def _forward_gains(theta, q_basis, residual, excluded):
    """Squared-residual decrease for adding each candidate column.

    Equivalent (up to rounding) to a full OLS refit per candidate: the
    decrease equals the squared projection of the residual onto the part
    of the column orthogonal to the current support basis.
    """
    z = theta - q_basis @ (q_basis.T @ theta) if q_basis is not None else theta.copy()
    sq = np.einsum("ij,ij->j", z, z)
    num = z.T @ residual
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = np.where(sq > 1e-24, num * num / sq, 0.0)
    gains[list(excluded)] = -np.inf
    return gains


def foba(theta, target, epsilon, backward_frequency=1):
    """Forward-backward greedy selection on the squared OLS residual.

    Forward steps add the column with the largest residual decrease and
    stop when the best decrease falls below epsilon.  After every
    `backward_frequency` forward steps, columns are deleted while the
    resulting residual increase stays below half of the last forward
    decrease.  Final coefficients are an OLS refit on the terminal support.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    target = np.asarray(target, dtype=float)
    support = []
    q_basis = None
    residual = target.copy()
    rss = float(target @ target)
    steps = []
    forward_count = 0
    last_decrease = np.inf

    def rss_on(sub_support):
        if not sub_support:
            return float(target @ target)
        sub = theta[:, sub_support]
        coef, _, _, _ = np.linalg.lstsq(sub, target, rcond=None)
        r = target - sub @ coef
        return float(r @ r)

    while True:
        gains = _forward_gains(theta, q_basis, residual, support)
        j = int(np.argmax(gains))  # ties resolve to the lowest column index
        decrease = float(gains[j])
        if decrease < epsilon or not np.isfinite(decrease):
            break
        support.append(j)
        steps.append(("add", j, decrease))
        last_decrease = decrease
        forward_count += 1
        # refresh the orthonormal basis and residual from scratch (cheap: k is small)
        q_basis, _ = np.linalg.qr(theta[:, support])
        residual = target - q_basis @ (q_basis.T @ target)
        rss = float(residual @ residual)

        if forward_count % backward_frequency == 0:
            while len(support) > 1:
                trials = [
                    (rss_on(support[:i] + support[i + 1:]), i)
                    for i in range(len(support))
                ]
                best_rss, i = min(trials)
                increase = best_rss - rss
                if increase < last_decrease / 2.0:
                    steps.append(("remove", support[i], increase))
                    del support[i]
                    q_basis, _ = np.linalg.qr(theta[:, support])
                    residual = target - q_basis @ (q_basis.T @ target)
                    rss = best_rss
                else:
                    break

    model = refit_on_support(
        theta, target, support,
        {"epsilon": float(epsilon), "backward_frequency": backward_frequency},
    )
    model.hyperparameters["steps"] = steps
    return model


def foba_sweep(theta, target, epsilon_grid, backward_frequency=1):
    """One FoBa run per stopping threshold, deduplicated by support."""
    models = [
        foba(theta, target, eps, backward_frequency=backward_frequency)
        for eps in sorted(epsilon_grid, reverse=True)
    ]
    return SweepResult(
        "foba", _dedup(models), {"epsilon": sorted(epsilon_grid, reverse=True)}
    )
