"""Centered finite-difference stencils of arbitrary derivative order and accuracy.

Coefficients are obtained from the moment (Vandermonde) system

    sum_j c_j * j**m = m! * delta(m, d)   for m = 0 .. len-1,

solved exactly in rational arithmetic so the moment conditions hold to
machine precision after conversion to float.  Spatial application wraps
periodically; temporal application is restricted to interior time levels
for which a centered stencil exists (one-sided stencils are never used).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np


@dataclass(frozen=True)
class Stencil:
    derivative_order: int
    accuracy: int
    offsets: np.ndarray  # int, symmetric about 0
    coefficients: np.ndarray  # float, divide by step**derivative_order on use

    @property
    def half_width(self):
        return int(self.offsets[-1])

    def __len__(self):
        return len(self.offsets)


def _solve_rational(matrix, rhs):
    """Gaussian elimination over Fraction entries (exact)."""
    n = len(rhs)
    a = [row[:] + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


@lru_cache(maxsize=None)
def make_centered_stencil(d: int, a: int) -> Stencil:
    """Centered stencil for the d-th derivative with accuracy order a (even).

    Length is 2*floor((d+1)/2) - 1 + a; offsets are symmetric about 0.
    """
    if d < 0:
        raise ValueError("derivative order must be non-negative")
    if a <= 0 or a % 2 != 0:
        raise ValueError("accuracy order must be a positive even integer")
    if d == 0:
        return Stencil(0, a, np.array([0]), np.array([1.0]))
    length = 2 * ((d + 1) // 2) - 1 + a
    half = length // 2
    offsets = list(range(-half, half + 1))
    matrix = [[Fraction(j) ** m for j in offsets] for m in range(length)]
    rhs = [Fraction(factorial(m)) if m == d else Fraction(0) for m in range(length)]
    coeffs = _solve_rational(matrix, rhs)
    return Stencil(
        d,
        a,
        np.array(offsets, dtype=int),
        np.array([float(c) for c in coeffs]),
    )


def apply_stencil_periodic(values: np.ndarray, stencil: Stencil, step: float) -> np.ndarray:
    """Apply a stencil along the last axis with periodic wraparound."""
    if len(stencil) > values.shape[-1]:
        raise ValueError(
            f"stencil width {len(stencil)} exceeds axis length {values.shape[-1]}"
        )
    out = np.zeros_like(values, dtype=float)
    for off, c in zip(stencil.offsets, stencil.coefficients):
        if c != 0.0:
            out += c * np.roll(values, -int(off), axis=-1)
    return out / step**stencil.derivative_order


def apply_spatial(field, d: int, a: int = 8) -> np.ndarray:
    """Spatial derivative estimate of order d at every (t, x) of a field."""
    stencil = make_centered_stencil(d, a)
    return apply_stencil_periodic(field.values, stencil, field.grid.dx)


def apply_temporal(field, d: int, a: int = 8, pad_t: int | None = None) -> np.ndarray:
    """Temporal derivative estimate on the nt - 2*pad_t interior time levels.

    pad_t defaults to the stencil half-width; a larger pad discards extra
    levels at both ends.  One-sided stencils are never substituted.
    """
    stencil = make_centered_stencil(d, a)
    half = stencil.half_width
    if pad_t is None:
        pad_t = half
    if pad_t < half:
        raise ValueError(f"pad_t={pad_t} smaller than stencil half-width {half}")
    nt = field.values.shape[0]
    retained = nt - 2 * pad_t
    if retained < 1:
        raise ValueError(
            f"need at least {2 * pad_t + 1} time levels for pad_t={pad_t}, got {nt}"
        )
    rows = np.arange(pad_t, nt - pad_t)
    out = np.zeros((retained, field.values.shape[1]))
    for off, c in zip(stencil.offsets, stencil.coefficients):
        if c != 0.0:
            out += c * field.values[rows + int(off)]
    return out / field.grid.dt**d
