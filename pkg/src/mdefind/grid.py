"""Periodic 1-D space-time grid and solver output container."""

from dataclasses import dataclass, field

import numpy as np


class BlowUpError(RuntimeError):
    """Raised when a solver produces non-finite values."""

    def __init__(self, step: int):
        super().__init__(f"solution became non-finite at time step {step}")
        self.step = step


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on the periodic domain [0, 1)."""

    nx: int
    nt: int
    dt: float

    def __post_init__(self):
        if self.nx < 1 or self.nt < 1:
            raise ValueError("nx and nt must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) / self.nx

    @property
    def h(self) -> float:
        """Time-step to grid-spacing ratio dt/dx."""
        return self.dt * self.nx


@dataclass
class SolutionField:
    """Solver output u(x, t): values[j, i] = u(i*dx, j*dt)."""

    grid: Grid1D
    values: np.ndarray  # shape (nt, nx)
    scheme_id: str
    cfl: float = field(default=float("nan"))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nt, self.grid.nx):
            raise ValueError(
                f"values shape {self.values.shape} != (nt, nx) = "
                f"{(self.grid.nt, self.grid.nx)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("solution field contains non-finite values")
