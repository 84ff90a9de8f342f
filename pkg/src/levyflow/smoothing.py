"""Kernel-weighted local polynomial smoothing of the dyad-level displacement distribution.

Each off-diagonal dyad is one observation at its distance, weighted by its
flow. The estimate at a grid point g is the local polynomial density
estimate

    f(g) = sum_i w_i K_p((d_i - g) / h) / (h * sum_i w_i)

where K_p is the degree-p equivalent kernel of the Epanechnikov kernel
(degree 0 and 1 give K itself, degree 2 a fourth-order kernel with smaller
bias on curved densities). Negative values, possible for degree 2, are
floored at zero. Grid points with no dyad inside the kernel support are gaps
and come back as NaN.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from ._io import write_csv
from .density import TailSegment, tail_of
from .errors import EmptyDistributionError, InputError
from .flow_model import DistanceMatrix, FlowMatrix, _require_same_registry

DEFAULT_GRID_POINTS = 200
DEFAULT_DEGREE = 2


def epanechnikov(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def _moment(m: int) -> float:
    # integral of u**m * K(u) over [-1, 1]
    if m % 2:
        return 0.0
    return 0.75 * (2.0 / (m + 1) - 2.0 / (m + 3))


@lru_cache(maxsize=None)
def equivalent_kernel_coeffs(degree: int) -> tuple[float, ...]:
    """Polynomial c with K_p(u) = K(u) * sum_j c_j u**j."""
    if degree not in (0, 1, 2):
        raise InputError(f"local polynomial degree must be 0, 1 or 2, got {degree!r}")
    S = np.array([[_moment(j + k) for k in range(degree + 1)] for j in range(degree + 1)])
    e1 = np.zeros(degree + 1)
    e1[0] = 1.0
    return tuple(float(c) for c in np.linalg.solve(S, e1))


def rot_bandwidth(d, w) -> float:
    """Rule of thumb 1.06 * sigma_w * N_eff**(-1/5), N_eff = (sum w)^2 / sum w^2."""
    d = np.asarray(d, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    sw = w.sum()
    if not sw > 0:
        raise EmptyDistributionError("no positive weights for bandwidth selection")
    mean = float(np.sum(w * d) / sw)
    sigma = math.sqrt(float(np.sum(w * (d - mean) ** 2) / sw))
    n_eff = sw**2 / float(np.sum(w * w))
    h = 1.06 * sigma * n_eff ** (-0.2)
    if not h > 0:
        raise InputError("rule-of-thumb bandwidth is zero (all flow at one distance); pass a bandwidth")
    return h


@dataclass(frozen=True, eq=False)
class SmoothedDensity:
    grid: np.ndarray
    estimate: np.ndarray
    bandwidth: float
    kernel: str = "epanechnikov"
    degree: int = DEFAULT_DEGREE

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.estimate)

    def to_csv(self, path) -> None:
        write_csv(path, "smoothed-density", ["x", "estimate", "bandwidth"],
                  [[float(g), float(e), self.bandwidth] for g, e in zip(self.grid, self.estimate)])


def smooth_sample(d, w, grid, bandwidth: float, degree: int = DEFAULT_DEGREE) -> SmoothedDensity:
    """Smooth a weighted sample of displacements ``d`` with weights ``w``."""
    d = np.asarray(d, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise InputError("grid must be a nonempty 1-d array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InputError("grid must be strictly increasing")
    h = float(bandwidth)
    if not (h > 0 and math.isfinite(h)):
        raise InputError(f"bandwidth must be positive, got {bandwidth!r}")
    total = float(w.sum())
    if not total > 0:
        raise EmptyDistributionError("total flow is zero")
    order = np.argsort(d, kind="stable")
    coeffs = np.array(equivalent_kernel_coeffs(degree))
    sums, counts = _kernels.local_poly_density(
        np.ascontiguousarray(d[order]), np.ascontiguousarray(w[order]), grid, h, coeffs
    )
    est = np.maximum(sums / (h * total), 0.0)
    gaps = counts == 0
    if gaps.any():
        warnings.warn(f"{int(gaps.sum())} grid point(s) have no observations within one bandwidth",
                      stacklevel=2)
        est[gaps] = np.nan
    grid = grid.copy()
    grid.setflags(write=False)
    est.setflags(write=False)
    return SmoothedDensity(grid, est, h, "epanechnikov", degree)


def default_grid(dist: DistanceMatrix, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, dist.max_distance, points)


def kernel_smooth(flow: FlowMatrix, dist: DistanceMatrix, grid=None, bandwidth: float | None = None,
                  degree: int = DEFAULT_DEGREE) -> SmoothedDensity:
    """Smoothed flow-weighted displacement density over all n*n - n dyads."""
    _require_same_registry(flow, dist, "flow and distance matrices")
    if not flow.total > 0:
        raise EmptyDistributionError(f"{flow.activity_type} ({flow.year}): total flow is zero")
    n = flow.registry.n
    off = ~np.eye(n, dtype=bool)
    d, w = dist.values[off], flow.values[off]
    if grid is None:
        grid = default_grid(dist)
    if bandwidth is None:
        bandwidth = rot_bandwidth(d, w)
    return smooth_sample(d, w, grid, bandwidth, degree)


def smoothed_tail(smoothed: SmoothedDensity, inclusive: bool = False) -> TailSegment:
    """Grid points right of the smoothed maximum with a positive estimate."""
    return tail_of(smoothed.grid, smoothed.estimate, inclusive, smoothed)
