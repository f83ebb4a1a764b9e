"""Discretized stable allocation of the torus window to a center set.

The solver runs cell-proposing deferred acceptance with per-center capacity
kappa = round(alpha / eps^d); proposals are handled in globally increasing
(distance, cell index) order, under which no acceptance is ever revoked, so
the pass terminates with the stable assignment for the discretized problem.
``check_stability`` verifies the output independently on every run.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from ._core import solve_grid_kernel
from ._grid_core import _cell_axis_indices, _distance_sq_rows
from .geometry import Domain
from .point_process import CenterSet

__all__ = [
    "UNCLAIMED",
    "Allocation",
    "PhaseStats",
    "solve_grid",
    "check_stability",
    "measure_X",
    "measure_radius",
    "phase_stats",
]

UNCLAIMED = -1

_HEADER = struct.Struct("<IdddiIQ")  # d, L, eps, alpha, kappa, n_centers, seed


@dataclass
class Allocation:
    """Assignment of grid cells to center indices (-1 = unclaimed)."""

    assignment: np.ndarray  # (n_cells,) int32
    alpha: float
    kappa: int
    dom: Domain
    centers: CenterSet
    counts: np.ndarray  # (n,) int64 cells per center
    pops: int  # proposals processed by the solver
    _site_dist: np.ndarray | None = field(default=None, repr=False)

    @property
    def alpha_hat(self) -> float:
        """Achieved appetite kappa * eps^d."""
        return self.kappa * self.dom.cell_volume

    def site_distances(self) -> np.ndarray:
        """Distance from each cell center to its assigned center (inf if unclaimed)."""
        if self._site_dist is None:
            dom = self.dom
            m = dom.cells_per_axis
            out = np.full(dom.n_cells, np.inf)
            claimed = np.nonzero(self.assignment >= 0)[0]
            for lo in range(0, claimed.size, 65536):
                idx = claimed[lo : lo + 65536]
                coords = (_cell_axis_indices(idx, m, dom.d) + 0.5) * dom.eps
                tgt = self.centers.points[self.assignment[idx]]
                d2 = np.zeros(idx.size)
                for j in range(dom.d):
                    dx = np.abs(coords[:, j] - tgt[:, j])
                    dx = np.minimum(dx, dom.L - dx)
                    d2 += dx * dx
                out[idx] = np.sqrt(d2)
            self._site_dist = out
        return self._site_dist

    def radii(self) -> np.ndarray:
        """Territory radius per center: max cell distance (0 for empty territories)."""
        dist = self.site_distances()
        claimed = self.assignment >= 0
        out = np.zeros(self.centers.n)
        np.maximum.at(out, self.assignment[claimed], dist[claimed])
        return out

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(
            self.dom.d,
            self.dom.L,
            self.dom.eps,
            self.alpha,
            self.kappa,
            self.centers.n,
            self.centers.seed & (1 << 64) - 1,
        )
        return head + self.assignment.astype("<i4").tobytes()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def load_allocation_bytes(data: bytes):
    """Parse the binary grid format; returns (header dict, assignment array)."""
    d, L, eps, alpha, kappa, n_centers, seed = _HEADER.unpack_from(data, 0)
    assign = np.frombuffer(data, dtype="<i4", offset=_HEADER.size).astype(np.int32)
    head = {"d": d, "L": L, "eps": eps, "alpha": alpha, "kappa": kappa, "n_centers": n_centers, "seed": seed}
    return head, assign


def solve_grid(centers: CenterSet, alpha: float, dom: Domain) -> Allocation:
    if centers.n == 0:
        raise ValueError("need a non-empty center set")
    if alpha <= 0:
        raise ValueError(f"appetite must be positive, got {alpha}")
    if centers.d != dom.d or abs(centers.L - dom.L) > 1e-12 * dom.L:
        raise ValueError("center set and domain disagree on (d, L)")
    kappa = round(alpha / dom.cell_volume)
    if kappa < 1:
        raise ValueError(f"achieved appetite is zero: alpha={alpha}, cell volume={dom.cell_volume}")
    assign, counts, pops = solve_grid_kernel(centers.points, dom.L, dom.cells_per_axis, kappa)
    if pops > dom.n_cells * centers.n:
        raise AssertionError("proposal counter exceeded #cells * #centers")
    alloc = Allocation(
        assignment=assign,
        alpha=alpha,
        kappa=kappa,
        dom=dom,
        centers=centers,
        counts=counts,
        pops=pops,
    )
    # A stable output never pairs an unclaimed cell with an unsated center.
    if np.any(counts < kappa) and np.any(assign < 0):
        raise AssertionError("solver produced unclaimed cells alongside unsated centers")
    return alloc


def _ball_cells(dom: Domain, center: np.ndarray, r: float):
    """Cells whose center point lies within torus distance < r of ``center``.

    Returns (flat indices, distances)."""
    m = dom.cells_per_axis
    eps = dom.eps
    if r <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    h = min(int(r / eps) + 2, (m - 1) // 2 + 1)
    axes = []
    for j in range(dom.d):
        base = int(math.floor(center[j] / eps))
        axes.append((base + np.arange(-h, h + 1)) % m)
    grids = np.meshgrid(*axes, indexing="ij")
    flat = np.zeros(grids[0].shape, dtype=np.int64)
    d2 = np.zeros(grids[0].shape)
    for j in range(dom.d):
        flat = flat * m + grids[j]
        dx = np.abs((grids[j] + 0.5) * eps - center[j])
        dx = np.minimum(dx, dom.L - dx)
        d2 += dx * dx
    flat = flat.ravel()
    dist = np.sqrt(d2.ravel())
    # duplicated cells are possible when 2h+1 >= m; keep unique flats
    if 2 * h + 1 >= m:
        flat, keep = np.unique(flat, return_index=True)
        dist = dist[keep]
    keep = dist < r
    return flat[keep], dist[keep]


def check_stability(alloc: Allocation, delta: float, max_pairs: int = 1_000_000) -> np.ndarray:
    """All delta-unstable (cell, center) pairs; empty array iff delta-stable.

    A pair is flagged when the cell desires the center (closer than its
    assignment by more than delta, or unclaimed) and the center covets the
    cell (unsated, or holding a cell farther by more than delta).
    """
    if delta < 0:
        raise ValueError(f"slack must be nonnegative, got {delta}")
    dom = alloc.dom
    dist = alloc.site_distances()
    radii = alloc.radii()
    sated = alloc.counts >= alloc.kappa
    unclaimed = np.nonzero(alloc.assignment < 0)[0]
    max_finite = float(dist[np.isfinite(dist)].max()) if np.isfinite(dist).any() else 0.0

    pairs = []
    total = 0
    for xi in range(alloc.centers.n):
        c = alloc.centers.points[xi]
        if sated[xi]:
            cand, d = _ball_cells(dom, c, radii[xi] - delta)
        else:
            cand, d = _ball_cells(dom, c, max_finite - delta)
        if cand.size:
            desire = d < dist[cand] - delta
            bad = cand[desire]
            total += bad.size
            if total > max_pairs:
                raise RuntimeError(f"more than {max_pairs} unstable pairs; inspect the allocation")
            for cell in bad:
                pairs.append((int(cell), xi))
        if not sated[xi] and unclaimed.size:
            # an unsated center covets everything; every unclaimed cell desires it
            total += unclaimed.size
            if total > max_pairs:
                raise RuntimeError(f"more than {max_pairs} unstable pairs; inspect the allocation")
            for cell in unclaimed:
                pairs.append((int(cell), xi))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    out = np.array(sorted(set(pairs)), dtype=np.int64)
    return out


def measure_X(alloc: Allocation) -> float:
    """Distance from the cell containing the origin to its assigned center;
    inf when that cell is unclaimed.  Site-side statistic: palm inputs are
    rejected."""
    if alloc.centers.palm:
        raise ValueError("measure_X is a site statistic; use a non-palm sample")
    c = alloc.assignment[0]
    if c < 0:
        return math.inf
    x = np.full(alloc.dom.d, 0.5 * alloc.dom.eps)
    diff = np.abs(x - alloc.centers.points[c])
    diff = np.minimum(diff, alloc.dom.L - diff)
    return float(np.sqrt(np.sum(diff * diff)))


def measure_radius(alloc: Allocation, xi: int) -> float:
    """Max torus distance from center xi to its territory cells.

    Empty territories return 0.0; emptiness is visible as counts[xi] == 0."""
    if xi < 0 or xi >= alloc.centers.n:
        raise ValueError(f"center index {xi} out of range")
    cells = np.nonzero(alloc.assignment == xi)[0]
    if cells.size == 0:
        return 0.0
    return float(alloc.site_distances()[cells].max())


@dataclass(frozen=True)
class PhaseStats:
    claimed_fraction: float
    unsated_fraction: float
    unclaimed_volume: float


def phase_stats(alloc: Allocation) -> PhaseStats:
    n_cells = alloc.dom.n_cells
    claimed = int((alloc.assignment >= 0).sum())
    unsated = int((alloc.counts < alloc.kappa).sum())
    return PhaseStats(
        claimed_fraction=claimed / n_cells,
        unsated_fraction=unsated / alloc.centers.n,
        unclaimed_volume=(n_cells - claimed) * alloc.dom.cell_volume,
    )
