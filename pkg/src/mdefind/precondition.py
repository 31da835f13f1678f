"""Multicollinearity diagnostics and preconditioning of the candidate library.

Two preconditioning steps are provided: diagonal scaling to unit column
norms, and the puffer transformation F = U D^-1 U^T built from the SVD of
the scaled matrix, which orthonormalizes the columns (condition number 1)
at the cost of inflating the noise by D^-2.

Note on VIF: the standard definition VIF_i = 1 / (1 - R_i^2) is used, with
an intercept in each sub-regression (columns are centered).  The library's
intercept column is excluded from VIF reporting.
"""

from dataclasses import dataclass

import numpy as np

from .library import CandidateLibrary, describe_term

VIF_CAP = 1e12


def condition_number(theta: np.ndarray) -> float:
    """Ratio of extreme singular values; inf if sigma_min is zero."""
    s = np.linalg.svd(np.atleast_2d(theta), compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def compute_vif(theta: np.ndarray, intercept_mask=None, cap: float = VIF_CAP):
    """Variance inflation factor per column, capped at `cap`.

    R_i^2 comes from regressing column i on all other columns with an
    intercept.  Intercept-like columns (mask or zero variance) report NaN.
    The computation goes through the inverse of the correlation matrix,
    which equals the per-column regression definition for full-rank input;
    near-singular matrices fall back to column-wise least-norm regressions.
    """
    theta = np.asarray(theta, dtype=float)
    n, p = theta.shape
    if p < 2:
        raise ValueError("VIF requires at least two columns")
    centered = theta - theta.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    constant = norms <= 1e-14 * (1.0 + np.abs(theta).max(axis=0))
    if intercept_mask is not None:
        constant = constant | np.asarray(intercept_mask, dtype=bool)

    vif = np.full(p, np.nan)
    active = np.flatnonzero(~constant)
    if len(active) == 0:
        return vif
    if len(active) == 1:
        vif[active] = 1.0
        return vif

    z = centered[:, active] / norms[active]
    corr = z.T @ z
    try:
        inv = np.linalg.inv(corr)
        diag = np.diag(inv)
        if np.all(diag > 0) and np.all(diag < cap):
            vif[active] = diag
            return vif
    except np.linalg.LinAlgError:
        pass

    # Rank-deficient or extremely collinear: per-column least-norm fits.
    for idx, col in enumerate(active):
        others = np.delete(z, idx, axis=1)
        coef, _, _, _ = np.linalg.lstsq(others, z[:, idx], rcond=None)
        resid = z[:, idx] - others @ coef
        r2 = 1.0 - float(resid @ resid)  # TSS of unit-norm centered column is 1
        vif[col] = min(cap, 1.0 / max(1.0 - r2, 1.0 / cap))
    return np.minimum(vif, cap)


def rms_vif(theta: np.ndarray, intercept_mask=None, cap: float = VIF_CAP) -> float:
    """Root-mean-square of the VIFs (NaN entries excluded)."""
    v = compute_vif(theta, intercept_mask=intercept_mask, cap=cap)
    v = v[np.isfinite(v)]
    if len(v) == 0:
        raise ValueError("no columns eligible for VIF")
    return float(np.sqrt(np.mean(v**2)))


def library_rms_vif(library: CandidateLibrary, cap: float = VIF_CAP) -> float:
    mask = [t.is_intercept for t in library.terms]
    return rms_vif(library.theta, intercept_mask=mask, cap=cap)


@dataclass
class PreconditionedSystem:
    theta: np.ndarray
    target: np.ndarray
    scale_diag: np.ndarray  # S_kk: physical xi = scaled xi / S_kk
    puffer_applied: bool
    library: CandidateLibrary

    def unscale(self, scaled_coefficients: np.ndarray) -> np.ndarray:
        return scaled_coefficients / self.scale_diag


def scale_columns(library: CandidateLibrary) -> PreconditionedSystem:
    """Divide each column by its 2-norm so the Gram diagonal is 1."""
    norms = np.linalg.norm(library.theta, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if len(zero):
        names = ", ".join(describe_term(library.terms[i]) for i in zero)
        raise ValueError(f"cannot scale identically zero column(s): {names}")
    return PreconditionedSystem(
        theta=library.theta / norms,
        target=library.target.copy(),
        scale_diag=norms,
        puffer_applied=False,
        library=library,
    )


def puffer_transform(
    system: PreconditionedSystem, rank_tol: float = 1e-13
) -> PreconditionedSystem:
    """Apply F = U D^-1 U^T from the thin SVD of the scaled matrix.

    The transformed matrix is U V^T with exactly orthonormal columns up to
    rounding.  Singular values below rank_tol * sigma_max raise a
    rank-deficiency error; no regularized fallback is attempted.
    """
    theta = system.theta
    n, p = theta.shape
    if n <= p:
        raise ValueError(f"puffer transformation requires n > p, got {n} <= {p}")
    u, s, vt = np.linalg.svd(theta, full_matrices=False)
    small = s < rank_tol * s[0]
    if np.any(small):
        raise ValueError(
            "rank-deficient system; near-zero singular values: "
            + ", ".join(f"{v:.3e}" for v in s[small])
        )
    return PreconditionedSystem(
        theta=u @ vt,
        target=u @ ((u.T @ system.target) / s),
        scale_diag=system.scale_diag,
        puffer_applied=True,
        library=system.library,
    )
