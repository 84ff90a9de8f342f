"""Flow-weighted binned distribution of displacement lengths and its tail."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._io import write_csv
from .errors import EmptyDistributionError, InputError, InsufficientTailError
from .flow_model import DistanceMatrix, FlowMatrix, _require_same_registry

DEFAULT_WIDTH = 500.0
DEFAULT_CUTOFF = 5000.0
ABSCISSAE = ("geometric", "midpoint")


def n_bins(max_distance: float, width: float) -> int:
    """ceil(max_distance / width), robust to rounding in the division."""
    k = math.floor(max_distance / width)
    if k * width > max_distance:
        k -= 1
    elif (k + 1) * width <= max_distance:
        k += 1
    return max(1, k if k * width == max_distance else k + 1)


def bin_abscissae(edges: np.ndarray, mode: str = "geometric") -> np.ndarray:
    """Representative displacement for each bin.

    ``geometric`` uses sqrt(lo * hi), the point where r**-2 equals its bin
    average, and the midpoint for the first bin (lo = 0). ``midpoint`` uses
    (lo + hi) / 2 throughout.
    """
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    if mode == "midpoint":
        return mid
    if mode != "geometric":
        raise InputError(f"unknown abscissa {mode!r}; choose from {ABSCISSAE}")
    return np.where(lo > 0, np.sqrt(lo * hi), mid)


@dataclass(frozen=True, eq=False)
class BinnedDensity:
    width: float
    edges: np.ndarray
    accumulated: np.ndarray
    mass: np.ndarray
    density: np.ndarray
    x: np.ndarray
    total_flow: float
    abscissa: str = "geometric"

    @property
    def nbins(self) -> int:
        return self.mass.size

    @property
    def bin_lo(self) -> np.ndarray:
        return self.edges[:-1]

    @property
    def bin_hi(self) -> np.ndarray:
        return self.edges[1:]

    def rows(self):
        return [
            [float(lo), float(hi), float(x), float(m), float(d)]
            for lo, hi, x, m, d in zip(self.bin_lo, self.bin_hi, self.x, self.mass, self.density)
        ]

    def to_csv(self, path, kind: str | None = None) -> None:
        header = ["bin_lo", "bin_hi", "x", "mass", "density"]
        rows = self.rows()
        if kind is not None:
            header = ["kind"] + header
            rows = [[kind] + r for r in rows]
        write_csv(path, "binned-density", header, rows)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def density_from_accumulated(acc: np.ndarray, width: float, abscissa: str = "geometric") -> BinnedDensity:
    acc = np.asarray(acc, dtype=np.float64).copy()
    total = math.fsum(acc)
    if not total > 0:
        raise EmptyDistributionError("total flow is zero; no displacement distribution")
    edges = np.arange(acc.size + 1, dtype=np.float64) * width
    mass = acc / total
    density = mass / width
    x = bin_abscissae(edges, abscissa)
    _freeze(edges, acc, mass, density, x)
    return BinnedDensity(float(width), edges, acc, mass, density, x, total, abscissa)


def _check_width(width):
    width = float(width)
    if not (width > 0 and math.isfinite(width)):
        raise InputError(f"bin width must be positive, got {width!r}")
    return width


def bin_flows(flow: FlowMatrix, dist: DistanceMatrix, width: float = DEFAULT_WIDTH,
              abscissa: str = "geometric") -> BinnedDensity:
    """Accumulate dyad flows into distance bins [k*w, (k+1)*w).

    The bin count is ceil(max off-diagonal distance / width); the maximum
    distance itself falls into the last bin.
    """
    _require_same_registry(flow, dist, "flow and distance matrices")
    width = _check_width(width)
    if not flow.total > 0:
        raise EmptyDistributionError(f"{flow.activity_type} ({flow.year}): total flow is zero")
    nb = n_bins(dist.max_distance, width)
    acc = _kernels.bin_accumulate(flow.values, dist.values, width, nb)
    return density_from_accumulated(acc, width, abscissa)


@dataclass(frozen=True, eq=False)
class TailSegment:
    """Points right of the global maximum used for power-law fitting.

    ``indices`` are positions in the parent's arrays (bins or grid points);
    ``start_index`` is the first of them and ``peak_index`` the maximum.
    """

    x: np.ndarray
    density: np.ndarray
    indices: np.ndarray
    peak_index: int
    inclusive: bool = False
    parent: object = None

    @property
    def start_index(self) -> int:
        return int(self.indices[0])

    @property
    def n_points(self) -> int:
        return int(self.x.size)

    def to_csv(self, path) -> None:
        write_csv(path, "tail", ["index", "x", "density"],
                  [[int(i), float(x), float(d)] for i, x, d in zip(self.indices, self.x, self.density)])


def tail_of(x, y, inclusive: bool = False, parent=None) -> TailSegment:
    """Tail of any sampled curve: positive points right of the leftmost maximum."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    finite = np.isfinite(y)
    if not finite.any():
        raise InsufficientTailError("no finite values to locate a maximum")
    peak = int(np.argmax(np.where(finite, y, -np.inf)))
    start = peak if inclusive else peak + 1
    idx = np.arange(start, y.size)
    idx = idx[finite[idx] & (y[idx] > 0) & (x[idx] > 0)]
    if idx.size < 2:
        raise InsufficientTailError(
            f"only {idx.size} usable tail point(s) right of the maximum at index {peak}"
        )
    tx, ty = x[idx].copy(), y[idx].copy()
    _freeze(tx, ty, idx)
    return TailSegment(tx, ty, idx, peak, inclusive, parent)


def extract_tail(binned: BinnedDensity, inclusive: bool = False) -> TailSegment:
    """Bins strictly right of the (leftmost) maximum-mass bin, zero bins dropped."""
    return tail_of(binned.x, binned.density, inclusive, binned)


def short_distance_share(flow: FlowMatrix, dist: DistanceMatrix, cutoff: float = DEFAULT_CUTOFF) -> float:
    """Fraction of total flow on dyads with distance <= cutoff."""
    _require_same_registry(flow, dist, "flow and distance matrices")
    cutoff = float(cutoff)
    if not cutoff > 0:
        raise InputError(f"cutoff must be positive, got {cutoff!r}")
    # fsum keeps share(cutoff >= max distance) exactly 1
    total = math.fsum(flow.values.ravel())
    if not total > 0:
        raise EmptyDistributionError(f"{flow.activity_type} ({flow.year}): total flow is zero")
    n = flow.registry.n
    near = (dist.values <= cutoff) & ~np.eye(n, dtype=bool)
    return math.fsum(flow.values[near]) / total
