"""Uniform 1-D cell-centered grids with periodic or zero-extension boundary."""

from dataclasses import dataclass

import numpy as np

PERIODIC = "periodic"
ZERO_EXTENSION = "zero-extension"


@dataclass(frozen=True)
class Grid:
    """Uniform grid of cell centers x_i = x_min + (i + 1/2) dx."""

    n_cells: int
    dx: float
    x_min: float
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"n_cells must be >= 4, got {self.n_cells}")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.boundary not in (PERIODIC, ZERO_EXTENSION):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @classmethod
    def from_window(cls, n_cells, x_min, x_max, boundary=PERIODIC):
        if not x_max > x_min:
            raise ValueError("x_max must exceed x_min")
        return cls(n_cells, (x_max - x_min) / n_cells, x_min, boundary)

    @property
    def x_max(self):
        return self.x_min + self.n_cells * self.dx

    @property
    def periodic(self):
        return self.boundary == PERIODIC

    @property
    def centers(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def width(self):
        return self.n_cells * self.dx

    def l1(self, u):
        return float(np.abs(u).sum() * self.dx)

    def l2_sq(self, u):
        return float(np.dot(u, u) * self.dx)

    def mass(self, u):
        return float(u.sum() * self.dx)

    def tv(self, u):
        """Total variation sum_i |u_{i+1} - u_i| (wrapping if periodic)."""
        t = float(np.abs(np.diff(u)).sum())
        if self.periodic:
            t += abs(float(u[0] - u[-1]))
        return t

    def grad_sq(self, u):
        """Discrete |grad u|^2 integral via forward differences."""
        d = np.diff(u)
        s = float(np.dot(d, d))
        if self.periodic:
            s += float(u[0] - u[-1]) ** 2
        return s / self.dx
