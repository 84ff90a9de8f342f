"""Synthetic dyadic flows with a known tail exponent.

Each unit move lands on a directed dyad. Dyads outside the shortest occupied
distance bin are chosen with probability proportional to d**-beta; the dyads
of that first bin share ``peak_mass`` equally, which puts the global maximum
at short distance as in real transnational data. ``peak_mass = 0`` disables
the peak allocation, so every dyad follows d**-beta.

Distances for the ``uniform`` model are stratified: the m unordered pairs get
d_min + (pi(t) + U_t) / m * (d_max - d_min) for a random permutation pi and
U_t ~ U(0, 1). Each pair's distance is marginally uniform, and dyad counts
per bin carry no sampling noise, so the generated bin masses track the
power law closely.

Randomness comes from numpy's PCG64 bit generator seeded with ``seed``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._io import write_json
from .density import DEFAULT_WIDTH
from .errors import InputError
from .flow_model import CountryRegistry, DistanceMatrix, FlowMatrix
from . import _kernels

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class SynthSpec:
    n: int = 100
    true_beta: float = 2.0
    peak_mass: float = 0.5
    n_moves: int = 1_000_000
    seed: int = 0
    d_min: float = 100.0
    d_max: float = 19_500.0
    width: float = DEFAULT_WIDTH
    distance_model: str = "uniform"

    def __post_init__(self):
        if self.n < 2:
            raise InputError("synthetic registry needs n >= 2")
        if not math.isfinite(self.true_beta):
            raise InputError("true_beta must be a real number")
        if self.n_moves < 1:
            raise InputError("n_moves must be >= 1")
        if not 0 <= self.peak_mass < 1:
            raise InputError("peak_mass must lie in [0, 1)")
        if not 0 < self.d_min < self.d_max:
            raise InputError("need 0 < d_min < d_max")
        if self.distance_model not in ("uniform", "matrix"):
            raise InputError(f"unknown distance model {self.distance_model!r}")

    def to_dict(self) -> dict:
        return {**asdict(self), "rng": RNG_ALGORITHM}


def synthetic_registry(n: int) -> CountryRegistry:
    width = max(3, len(str(n - 1)))
    return CountryRegistry(tuple(f"C{i:0{width}d}" for i in range(n)))


def uniform_distances(n: int, d_min: float, d_max: float, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    m = iu[0].size
    d = d_min + (rng.permutation(m) + rng.random(m)) / m * (d_max - d_min)
    v = np.zeros((n, n))
    v[iu] = d
    return v + v.T


def dyad_probabilities(dist: DistanceMatrix, true_beta: float, peak_mass: float,
                       width: float) -> np.ndarray:
    """Per-dyad move probabilities (n x n, zero diagonal)."""
    n = dist.registry.n
    off = ~np.eye(n, dtype=bool)
    d = dist.values[off]
    p = np.zeros_like(d)
    if peak_mass > 0:
        k = _kernels.bin_indices(np.ascontiguousarray(d), float(width), np.iinfo(np.intp).max)
        first = k == k.min()
        rest = ~first
        if not rest.any():
            raise InputError("no dyads beyond the first distance bin; cannot place a tail")
        w = d[rest] ** -float(true_beta)
        p[rest] = (1.0 - peak_mass) * w / w.sum()
        p[first] = peak_mass / first.sum()
    else:
        w = d ** -float(true_beta)
        p = w / w.sum()
    out = np.zeros((n, n))
    out[off] = p
    return out


def sample_levy_flows(spec: SynthSpec, dist: DistanceMatrix | None = None):
    """Draw ``spec.n_moves`` unit moves; returns (FlowMatrix, DistanceMatrix).

    With ``distance_model="matrix"`` the supplied ``dist`` is used and its
    registry overrides ``spec.n``.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if spec.distance_model == "matrix":
        if dist is None:
            raise InputError("distance_model 'matrix' needs a DistanceMatrix")
    else:
        reg = synthetic_registry(spec.n)
        dist = DistanceMatrix(reg, uniform_distances(spec.n, spec.d_min, spec.d_max, rng))
    probs = dyad_probabilities(dist, spec.true_beta, spec.peak_mass, spec.width)
    n = dist.registry.n
    off = ~np.eye(n, dtype=bool)
    p = probs[off]
    counts = rng.multinomial(spec.n_moves, p / p.sum())
    values = np.zeros((n, n))
    values[off] = counts
    flow = FlowMatrix(dist.registry, values, "synthetic", None, "persons",
                      {"spec": spec.to_dict()})
    return flow, dist


def expected_flows(spec: SynthSpec, dist: DistanceMatrix) -> FlowMatrix:
    """Expected move counts per dyad for ``spec`` on ``dist``."""
    probs = dyad_probabilities(dist, spec.true_beta, spec.peak_mass, spec.width)
    return FlowMatrix(dist.registry, probs * spec.n_moves, "synthetic-expected")


def corrupt(flow: FlowMatrix, missing_frac: float, seed: int = 0) -> FlowMatrix:
    """Zero a seeded random ``missing_frac`` of the nonzero cells."""
    if not 0 <= missing_frac < 1:
        raise InputError("missing_frac must lie in [0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    nz = np.flatnonzero(flow.values)
    k = int(round(missing_frac * nz.size))
    k = min(k, max(nz.size - 1, 0))
    drop = rng.choice(nz, size=k, replace=False) if k else np.array([], dtype=np.intp)
    values = flow.values.copy().ravel()
    values[drop] = 0.0
    meta = dict(flow.meta)
    meta["corrupted"] = {"missing_frac": missing_frac, "seed": seed, "zeroed_cells": int(k)}
    return flow.replace(values=values.reshape(flow.values.shape), meta=meta)


def write_spec(spec: SynthSpec, path) -> None:
    write_json(path, "synth-spec", spec.to_dict())
