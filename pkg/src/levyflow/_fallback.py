"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``."""
import numpy as np


def bin_indices(d, width, nbins):
    d = np.asarray(d, dtype=np.float64)
    k = np.floor(d / width).astype(np.intp)
    kw = k * width
    k = np.where(kw > d, k - 1, k)
    k = np.where((k + 1) * width <= d, k + 1, k)
    return np.clip(k, 0, nbins - 1)


def bin_accumulate(flow, dist, width, nbins):
    n = flow.shape[0]
    off = ~np.eye(n, dtype=bool)
    k = bin_indices(dist[off], width, nbins)
    # bincount adds weights sequentially in row-major order, like the compiled loop
    return np.bincount(k, weights=flow[off], minlength=nbins).astype(np.float64)


def local_poly_density(d_sorted, f_sorted, grid, h, coeffs):
    d_sorted = np.asarray(d_sorted, dtype=np.float64)
    f_sorted = np.asarray(f_sorted, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    lo = np.searchsorted(d_sorted, grid - h, side="right")
    hi = np.searchsorted(d_sorted, grid + h, side="left")
    sums = np.zeros(grid.size)
    counts = np.zeros(grid.size, dtype=np.intp)
    for g in range(grid.size):
        u = (d_sorted[lo[g]:hi[g]] - grid[g]) / h
        inside = np.abs(u) < 1.0
        u = u[inside]
        poly = np.polynomial.polynomial.polyval(u, coeffs)
        sums[g] = np.sum(f_sorted[lo[g]:hi[g]][inside] * 0.75 * (1.0 - u * u) * poly)
        counts[g] = u.size
    return sums, counts
