# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid allocation kernel.

Same contract and same arithmetic as ``_grid_core.solve_grid_kernel`` (see
that module for the algorithm description); nearest-center queries use a
bucket grid with ring-expansion search plus a bounded max-heap for the
rank-k candidate, which is what makes whole-window solves fast.  Outputs
are bit-identical to the fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, pow
from libc.stdlib cimport free, malloc

cnp.import_array()

KERNEL_NAME = "cython"

DEF MAXD = 6


cdef inline bint _less(double a_d2, long a_id, double b_d2, long b_id) nogil:
    if a_d2 != b_d2:
        return a_d2 < b_d2
    return a_id < b_id


# ---------------------------------------------------------------------------
# min-heap of pending proposals, keyed by (distance^2, cell index)
# ---------------------------------------------------------------------------

cdef inline void _heap_push(double* hd, long* hc, Py_ssize_t* size, double d2, long cell) nogil:
    cdef Py_ssize_t i = size[0], parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(d2, cell, hd[parent], hc[parent]):
            hd[i] = hd[parent]
            hc[i] = hc[parent]
            i = parent
        else:
            break
    hd[i] = d2
    hc[i] = cell


cdef inline void _heap_pop(double* hd, long* hc, Py_ssize_t* size, double* out_d2, long* out_cell) nogil:
    out_d2[0] = hd[0]
    out_cell[0] = hc[0]
    size[0] -= 1
    cdef Py_ssize_t n = size[0], i = 0, child
    if n == 0:
        return
    cdef double last_d2 = hd[n]
    cdef long last_c = hc[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(hd[child + 1], hc[child + 1], hd[child], hc[child]):
            child += 1
        if _less(hd[child], hc[child], last_d2, last_c):
            hd[i] = hd[child]
            hc[i] = hc[child]
            i = child
        else:
            break
    hd[i] = last_d2
    hc[i] = last_c


cdef inline double _dist_sq(const double* x, const double* c, int d, double L) nogil:
    cdef double d2 = 0.0, dx, u
    cdef int j
    for j in range(d):
        dx = fabs(x[j] - c[j])
        u = L - dx
        if u < dx:
            dx = u
        d2 += dx * dx
    return d2


cdef inline void _scan_bucket(long flat, const double* x, const double* centers, int d,
                              double L, const long* bstart, const long* bitems,
                              double last_d2, long last_idx,
                              double* best_d2, long* best_idx) nogil:
    cdef long t, j
    cdef double d2
    for t in range(bstart[flat], bstart[flat + 1]):
        j = bitems[t]
        d2 = _dist_sq(x, centers + j * d, d, L)
        if _less(last_d2, last_idx, d2, j) and (best_idx[0] < 0 or _less(d2, j, best_d2[0], best_idx[0])):
            best_d2[0] = d2
            best_idx[0] = j


cdef long _next_nearest(const double* x, const double* centers, long n, int d, double L,
                        const long* bstart, const long* bitems, int B, double bside,
                        double last_d2, long last_idx, double* out_d2) nogil:
    """Successor of (last_d2, last_idx) in (squared distance, index) order;
    -1 when no center remains.  Pass last_d2 = -1 for the global nearest.

    Ring bounds: a bucket at Chebyshev offset rho only holds centers at
    distance in [(rho-1)*bside, (rho+1)*bside*sqrt(d)], so rings strictly
    inside the last distance are skipped and the scan stops once no ring
    can beat the best successor found."""
    cdef double best_d2 = 0.0
    cdef long best_idx = -1
    cdef int a = B // 2, bmax = (B - 1) // 2
    cdef int rho, j, ox, oy, lo, hi, clo, chi
    cdef long qb[MAXD]
    cdef long off[MAXD]
    cdef long flat
    cdef double lo_bound, hi_bound
    cdef bint on_shell
    for j in range(d):
        qb[j] = <long> (x[j] / bside)
        if qb[j] >= B:
            qb[j] = B - 1
    for rho in range(0, a + 1):
        if best_idx >= 0:
            lo_bound = (rho - 1) * bside
            if lo_bound * lo_bound > best_d2:
                break
        if last_d2 > 0.0:
            hi_bound = (rho + 1) * bside
            if hi_bound * hi_bound * d < last_d2:
                continue  # every center in this ring is strictly closer than last
        if d == 1:
            flat = ((qb[0] - rho) % B + B) % B
            _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
            if rho > 0 and rho <= bmax:
                flat = (qb[0] + rho) % B
                _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
        elif d == 2:
            if rho == 0:
                flat = qb[0] * B + qb[1]
                _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
            else:
                lo = -rho
                hi = rho if rho <= bmax else bmax
                # rows oy = -rho and (if in range) +rho
                for ox in range(lo, hi + 1):
                    flat = (((qb[0] + ox) % B + B) % B) * B + (((qb[1] - rho) % B + B) % B)
                    _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
                    if rho <= bmax:
                        flat = (((qb[0] + ox) % B + B) % B) * B + ((qb[1] + rho) % B)
                        _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
                # columns ox = -rho and +rho, interior oy only
                clo = (-rho + 1) if (-rho + 1) >= -a else -a
                chi = (rho - 1) if (rho - 1) <= bmax else bmax
                for oy in range(clo, chi + 1):
                    flat = (((qb[0] - rho) % B + B) % B) * B + (((qb[1] + oy) % B + B) % B)
                    _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
                    if rho <= bmax:
                        flat = ((qb[0] + rho) % B) * B + (((qb[1] + oy) % B + B) % B)
                        _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
        else:
            # generic odometer over the clipped box, keeping the Chebyshev shell
            for j in range(d):
                off[j] = -rho
            while True:
                on_shell = False
                for j in range(d):
                    if off[j] == -rho or off[j] == rho:
                        on_shell = True
                        break
                if on_shell:
                    flat = 0
                    for j in range(d):
                        flat = flat * B + ((qb[j] + off[j]) % B + B) % B
                    _scan_bucket(flat, x, centers, d, L, bstart, bitems, last_d2, last_idx, &best_d2, &best_idx)
                j = d - 1
                while j >= 0:
                    off[j] += 1
                    if off[j] <= (rho if rho <= bmax else bmax):
                        break
                    off[j] = -rho
                    j -= 1
                if j < 0:
                    break
    out_d2[0] = best_d2
    return best_idx


def solve_grid_kernel(centers_in, double L, long m, long kappa):
    centers_arr = np.ascontiguousarray(centers_in, dtype=np.float64)
    cdef long n = centers_arr.shape[0]
    cdef int d = centers_arr.shape[1]
    if n == 0:
        raise ValueError("need at least one center")
    if d > MAXD:
        raise ValueError(f"kernel supports d <= {MAXD}")
    cdef double[:, ::1] centers = centers_arr
    cdef const double* cptr = &centers[0, 0]
    cdef long n_cells = 1
    cdef int j
    for j in range(d):
        n_cells *= m
    cdef double eps = L / m

    # bucket grid over centers, ~1 center per bucket
    cdef int B = <int> floor(pow(<double> n, 1.0 / d) + 0.5)
    if B < 1:
        B = 1
    if B > 2048:
        B = 2048
    cdef double bside = L / B
    cdef long n_buckets = 1
    for j in range(d):
        n_buckets *= B

    bstart_arr = np.zeros(n_buckets + 1, dtype=np.int64)
    bitems_arr = np.empty(n, dtype=np.int64)
    cdef long[::1] bstart = bstart_arr
    cdef long[::1] bitems = bitems_arr
    cdef long i, flat, bi
    for i in range(n):
        flat = 0
        for j in range(d):
            bi = <long> (centers[i, j] / bside)
            if bi >= B:
                bi = B - 1
            flat = flat * B + bi
        bstart[flat + 1] += 1
    for i in range(n_buckets):
        bstart[i + 1] += bstart[i]
    fill_arr = np.zeros(n_buckets, dtype=np.int64)
    cdef long[::1] fill = fill_arr
    for i in range(n):
        flat = 0
        for j in range(d):
            bi = <long> (centers[i, j] / bside)
            if bi >= B:
                bi = B - 1
            flat = flat * B + bi
        bitems[bstart[flat] + fill[flat]] = i
        fill[flat] += 1

    assign_arr = np.full(n_cells, -1, dtype=np.int32)
    counts_arr = np.zeros(n, dtype=np.int64)
    cur_center_arr = np.empty(n_cells, dtype=np.int64)
    cur_rank_arr = np.zeros(n_cells, dtype=np.int64)
    cdef int[::1] assign = assign_arr
    cdef long[::1] counts = counts_arr
    cdef long[::1] cur_center = cur_center_arr
    cdef long[::1] cur_rank = cur_rank_arr

    cdef double* heap_d2 = <double*> malloc(n_cells * sizeof(double))
    cdef long* heap_cell = <long*> malloc(n_cells * sizeof(long))
    if heap_d2 == NULL or heap_cell == NULL:
        free(heap_d2); free(heap_cell)
        raise MemoryError()

    cdef Py_ssize_t heap_size = 0
    cdef double x[MAXD]
    cdef long rem, cell, best, rank, c
    cdef long n_sated = 0
    cdef long long pops = 0
    cdef double d2, q_d2

    try:
        with nogil:
            for cell in range(n_cells):
                rem = cell
                for j in range(d - 1, -1, -1):
                    x[j] = (rem % m + 0.5) * eps
                    rem //= m
                best = _next_nearest(x, cptr, n, d, L, &bstart[0], &bitems[0], B, bside,
                                     -1.0, -1, &q_d2)
                cur_center[cell] = best
                _heap_push(heap_d2, heap_cell, &heap_size, q_d2, cell)

            while heap_size > 0:
                _heap_pop(heap_d2, heap_cell, &heap_size, &d2, &cell)
                pops += 1
                c = cur_center[cell]
                if counts[c] < kappa:
                    assign[cell] = <int> c
                    counts[c] += 1
                    if counts[c] == kappa:
                        n_sated += 1
                        if n_sated == n:
                            break
                else:
                    rank = cur_rank[cell] + 1
                    if rank >= n:
                        continue
                    rem = cell
                    for j in range(d - 1, -1, -1):
                        x[j] = (rem % m + 0.5) * eps
                        rem //= m
                    best = _next_nearest(x, cptr, n, d, L, &bstart[0], &bitems[0], B, bside,
                                         d2, c, &q_d2)
                    cur_center[cell] = best
                    cur_rank[cell] = rank
                    _heap_push(heap_d2, heap_cell, &heap_size, q_d2, cell)
    finally:
        free(heap_d2)
        free(heap_cell)

    return assign_arr, counts_arr, int(pops)
