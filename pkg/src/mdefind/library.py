"""Candidate-term library assembly for the sparse regression problem u_t = Theta(u) xi.

A term is a power of u times a product of spatial derivatives (e.g.
u^2 * u_x * u_xx), a bare power of u, an intercept, or a pure time
derivative (u_tt, u_ttt, ...).  The library matrix Theta evaluates every
term on the grid samples for which centered stencils exist in time.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import SolutionField
from .stencils import apply_stencil_periodic, apply_temporal, make_centered_stencil


@dataclass(frozen=True, order=True)
class TermDescriptor:
    u_power: int = 0
    spatial_derivatives: tuple = ()  # sorted multiset of derivative orders
    time_derivative_order: int = 0
    is_intercept: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "spatial_derivatives", tuple(sorted(self.spatial_derivatives))
        )
        if self.is_intercept and (
            self.u_power or self.spatial_derivatives or self.time_derivative_order
        ):
            raise ValueError("intercept term cannot carry factors")
        if self.time_derivative_order and (self.u_power or self.spatial_derivatives):
            raise ValueError("time derivatives are standalone terms")

    @property
    def cumulative_order(self) -> int:
        return sum(self.spatial_derivatives)


def describe_term(term: TermDescriptor) -> str:
    """Stable human-readable name, e.g. 'u^2*u_x*u_xx', 'u_ttt', '1'."""
    if term.is_intercept:
        return "1"
    if term.time_derivative_order:
        return "u_" + "t" * term.time_derivative_order
    parts = []
    if term.u_power == 1:
        parts.append("u")
    elif term.u_power > 1:
        parts.append(f"u^{term.u_power}")
    for d in term.spatial_derivatives:
        parts.append("u_" + "x" * d)
    return "*".join(parts)


@dataclass(frozen=True)
class LibrarySpec:
    max_single_derivative_order: int = 6
    max_cumulative_product_order: int = 0  # 0 disables derivative products
    max_u_power: int = 6
    include_time_derivatives: tuple = ()
    accuracy: int = 8
    pad_t: int | None = None

    def __post_init__(self):
        if self.max_single_derivative_order < 1:
            raise ValueError("max_single_derivative_order must be >= 1")
        if self.accuracy % 2 != 0 or self.accuracy <= 0:
            raise ValueError("accuracy must be a positive even integer")
        object.__setattr__(
            self, "include_time_derivatives", tuple(self.include_time_derivatives)
        )

    def required_pad_t(self) -> int:
        """Half-width of the widest temporal stencil (target u_t included)."""
        orders = (1,) + self.include_time_derivatives
        return max(
            make_centered_stencil(d, self.accuracy).half_width for d in orders
        )

    def effective_pad_t(self) -> int:
        required = self.required_pad_t()
        if self.pad_t is None:
            return required
        if self.pad_t < required:
            raise ValueError(
                f"pad_t={self.pad_t} below required stencil half-width {required}"
            )
        return self.pad_t


@lru_cache(maxsize=None)
def _partitions(n: int) -> tuple:
    """All multisets of positive integers summing to n (ascending tuples)."""

    def gen(n, smallest):
        if n == 0:
            yield ()
            return
        for first in range(smallest, n + 1):
            for rest in gen(n - first, first):
                yield (first,) + rest

    return tuple(gen(n, 1))


def enumerate_terms(spec: LibrarySpec):
    """Deterministic, duplicate-free term list for a library spec."""
    multisets = set()
    for d in range(1, spec.max_single_derivative_order + 1):
        multisets.add((d,))
    for total in range(1, spec.max_cumulative_product_order + 1):
        multisets.update(_partitions(total))
    ordered_multisets = sorted(multisets, key=lambda m: (sum(m), len(m), m))

    terms = [TermDescriptor(is_intercept=True)]
    for k in range(1, spec.max_u_power + 1):
        terms.append(TermDescriptor(u_power=k))
    for ms in ordered_multisets:
        for k in range(0, spec.max_u_power + 1):
            terms.append(TermDescriptor(u_power=k, spatial_derivatives=ms))
    for d in sorted(spec.include_time_derivatives):
        terms.append(TermDescriptor(time_derivative_order=d))

    seen = set()
    unique = []
    for t in terms:
        if t not in seen:
            seen.add(t)
            unique.append(t)
    return unique


@dataclass
class CandidateLibrary:
    terms: list
    theta: np.ndarray  # (n_samples, p)
    target: np.ndarray  # u_t on retained samples
    time_levels: np.ndarray  # absolute time level per retained block
    grid: object
    spec: LibrarySpec
    field: SolutionField | None = None

    @property
    def p(self) -> int:
        return self.theta.shape[1]

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def term_names(self):
        return [describe_term(t) for t in self.terms]

    def index_of(self, term: TermDescriptor) -> int:
        return self.terms.index(term)

    def sample_index_map(self):
        """(time level, space index) per row; rows are time-major."""
        nx = self.grid.nx
        levels = np.repeat(self.time_levels, nx)
        xs = np.tile(np.arange(nx), len(self.time_levels))
        return levels, xs


def build_library(field: SolutionField, spec: LibrarySpec) -> CandidateLibrary:
    """Evaluate every term of the spec on the retained space-time samples."""
    pad_t = spec.effective_pad_t()
    nt = field.grid.nt
    if nt - 2 * pad_t < 1:
        raise ValueError(
            f"nt={nt} leaves no retained levels for pad_t={pad_t}; "
            f"need nt >= {2 * pad_t + 1}"
        )
    terms = enumerate_terms(spec)
    u_ret = field.values[pad_t : nt - pad_t]
    retained, nx = u_ret.shape
    n = retained * nx

    spatial_orders = sorted({d for t in terms for d in t.spatial_derivatives})
    derivs = {
        d: apply_stencil_periodic(
            u_ret, make_centered_stencil(d, spec.accuracy), field.grid.dx
        )
        for d in spatial_orders
    }
    powers = {0: np.ones_like(u_ret), 1: u_ret}
    for k in range(2, max((t.u_power for t in terms), default=0) + 1):
        powers[k] = powers[k - 1] * u_ret

    theta = np.empty((n, len(terms)))
    for col, term in enumerate(terms):
        if term.is_intercept:
            block = powers[0]
        elif term.time_derivative_order:
            block = apply_temporal(
                field, term.time_derivative_order, spec.accuracy, pad_t
            )
        else:
            block = powers[term.u_power].copy()
            for d in term.spatial_derivatives:
                block = block * derivs[d]
        theta[:, col] = block.reshape(n)

    target = apply_temporal(field, 1, spec.accuracy, pad_t).reshape(n)
    return CandidateLibrary(
        terms=terms,
        theta=theta,
        target=target,
        time_levels=np.arange(pad_t, nt - pad_t),
        grid=field.grid,
        spec=spec,
        field=field,
    )
