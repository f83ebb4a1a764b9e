"""Metric and measure primitives for the d-dimensional torus window.

The simulation window is a torus of side L discretized into an eps-grid;
periodic geometry removes boundary effects so finite windows stay
translation invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Domain", "torus_distance", "ball_volume", "cell_centers"]


@dataclass(frozen=True)
class Domain:
    """Torus window: dimension d, side L, grid resolution eps.

    L/eps must be an integer and eps <= L/20 (at least 20 cells per axis).
    """

    d: int
    L: float
    eps: float
    cells_per_axis: int = field(init=False)

    def __post_init__(self):
        if self.d < 1 or self.d != int(self.d):
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if self.L <= 0:
            raise ValueError(f"torus side must be positive, got {self.L}")
        if self.eps <= 0:
            raise ValueError(f"grid resolution must be positive, got {self.eps}")
        m = round(self.L / self.eps)
        if m < 1 or abs(m * self.eps - self.L) > 1e-9 * self.L:
            raise ValueError(f"L/eps must be an exact integer, got {self.L / self.eps}")
        if self.eps > self.L / 20 + 1e-12:
            raise ValueError(f"eps={self.eps} too coarse: need eps <= L/20 = {self.L / 20}")
        object.__setattr__(self, "cells_per_axis", m)

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.d

    @property
    def cell_volume(self) -> float:
        return self.eps**self.d


def torus_distance(x, y, dom: Domain) -> float:
    """Periodic Euclidean distance: min over integer shifts k of |x - y - Lk|."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (dom.d,) or y.shape != (dom.d,):
        raise ValueError(f"points must have {dom.d} coordinates, got {x.shape} and {y.shape}")
    dx = np.abs(x - y)
    dx = np.minimum(dx, dom.L - dx)
    return float(np.sqrt(np.sum(dx * dx)))


def ball_volume(d: int, r: float) -> float:
    """Volume of the Euclidean r-ball: omega_d * r^d with omega_d = pi^(d/2)/Gamma(d/2+1)."""
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    return unit_ball_volume(d) * r**d


def unit_ball_volume(d: int) -> float:
    if d < 1 or d != int(d):
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def cell_centers(dom: Domain) -> np.ndarray:
    """Cell-center points of the eps-grid, row-major, shape (n_cells, d)."""
    m = dom.cells_per_axis
    axis = (np.arange(m) + 0.5) * dom.eps
    grids = np.meshgrid(*([axis] * dom.d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)
