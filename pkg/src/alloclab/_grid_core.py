"""Pure-Python/numpy fallback for the grid allocation kernel.

Proposals are processed in globally increasing (squared distance, cell index)
order; with distance-aligned preferences on both sides this deferred
acceptance never displaces an accepted cell, so a single pass produces the
stable assignment.  The compiled kernel in ``_grid_kernel.pyx`` implements
the same contract bit-for-bit (same double arithmetic, same tie-breaks).

Kernel contract
---------------
solve_grid_kernel(centers, L, m, kappa) -> (assign, counts, pops)
    centers : (n, d) float64 in [0, L)
    assign  : (m**d,) int32, center index or -1 (unclaimed), row-major cells
    counts  : (n,) int64 territory sizes in cells
    pops    : number of proposals processed (termination audit)
"""

from __future__ import annotations

import heapq

import numpy as np

__all__ = ["solve_grid_kernel", "KERNEL_NAME"]

KERNEL_NAME = "python"

_CHUNK = 8192


def _cell_axis_indices(idx: np.ndarray, m: int, d: int) -> np.ndarray:
    """Row-major decomposition of flat cell indices, shape (len(idx), d)."""
    out = np.empty((idx.shape[0], d), dtype=np.int64)
    rem = idx.astype(np.int64)
    for j in range(d - 1, -1, -1):
        out[:, j] = rem % m
        rem //= m
    return out


def _distance_sq_rows(coords: np.ndarray, centers: np.ndarray, L: float) -> np.ndarray:
    """Torus squared distances, shape (rows, n); axis terms accumulated in
    axis order to match the C kernel's arithmetic."""
    rows, d = coords.shape
    d2 = np.zeros((rows, centers.shape[0]))
    for j in range(d):
        dx = np.abs(coords[:, j : j + 1] - centers[None, :, j])
        dx = np.minimum(dx, L - dx)
        d2 += dx * dx
    return d2


def solve_grid_kernel(centers: np.ndarray, L: float, m: int, kappa: int):
    centers = np.ascontiguousarray(centers, dtype=float)
    n, d = centers.shape
    if n == 0:
        raise ValueError("need at least one center")
    n_cells = m**d
    eps = L / m

    assign = np.full(n_cells, -1, dtype=np.int32)
    counts = np.zeros(n, dtype=np.int64)
    cur_center = np.empty(n_cells, dtype=np.int64)
    cur_rank = np.zeros(n_cells, dtype=np.int64)

    # Rank-0 proposals for every cell, chunked argmin (ties -> lowest index).
    heap: list[tuple[float, int]] = []
    for lo in range(0, n_cells, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, n_cells))
        coords = (_cell_axis_indices(idx, m, d) + 0.5) * eps
        d2 = _distance_sq_rows(coords, centers, L)
        best = np.argmin(d2, axis=1)
        cur_center[idx] = best
        for i, cell in enumerate(idx):
            heap.append((d2[i, best[i]], int(cell)))
    heapq.heapify(heap)

    n_sated = 0
    pops = 0
    while heap:
        d2_val, cell = heapq.heappop(heap)
        pops += 1
        c = cur_center[cell]
        if counts[c] < kappa:
            assign[cell] = c
            counts[c] += 1
            if counts[c] == kappa:
                n_sated += 1
                if n_sated == n:
                    break  # every center sated: all remaining cells unclaimed
        else:
            rank = cur_rank[cell] + 1
            if rank >= n:
                continue  # exhausted every center
            coords = (_cell_axis_indices(np.array([cell]), m, d) + 0.5) * eps
            row = _distance_sq_rows(coords, centers, L)[0]
            order = np.lexsort((np.arange(n), row))
            c_new = order[rank]
            cur_center[cell] = c_new
            cur_rank[cell] = rank
            heapq.heappush(heap, (row[c_new], int(cell)))

    return assign, counts, pops
