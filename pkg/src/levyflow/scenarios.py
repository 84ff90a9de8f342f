"""Null models in which distance plays no role, binned on the empirical grid.

* ``strict-flat``: activity equally likely at every distance in [0, max].
* ``dyad-distance``: the same amount of activity on every country pair.
* ``population``: every individual picks a destination country uniformly at
  random, i.e. flow(i, j) = pop(i); ``pop_weight="product"`` uses
  pop(i) * pop(j) instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._io import read_csv_rows, write_json
from .density import DEFAULT_WIDTH, BinnedDensity, bin_flows, density_from_accumulated, n_bins
from .errors import InputError, ParseError, UnknownCountryError
from .flow_model import CountryRegistry, DistanceMatrix, FlowMatrix, _check_registry_pair

KINDS = ("strict-flat", "dyad-distance", "population")
POP_WEIGHTS = ("origin", "product")


@dataclass(frozen=True, eq=False)
class PopulationVector:
    registry: CountryRegistry
    pop: np.ndarray

    def __post_init__(self):
        p = np.array(self.pop, dtype=np.float64)
        if p.shape != (self.registry.n,):
            raise InputError(f"population vector length {p.shape} does not match registry size")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InputError("populations must be finite and nonnegative")
        if not np.any(p > 0):
            raise InputError("population vector is all zero")
        p.setflags(write=False)
        object.__setattr__(self, "pop", p)


@dataclass(frozen=True, eq=False)
class ScenarioDensity:
    kind: str
    binned: BinnedDensity
    pop_weight: str | None = None

    def to_csv(self, path) -> None:
        self.binned.to_csv(path, kind=self.kind)


def load_population(path, registry: CountryRegistry) -> PopulationVector:
    """Read ``country,pop``. Every registry country must be present."""
    rows = read_csv_rows(path)
    if rows and [c.strip().lower() for c in rows[0][:2]] == ["country", "pop"]:
        rows = rows[1:]
    pop = np.full(registry.n, np.nan)
    for lineno, row in enumerate(rows, start=2):
        if len(row) < 2:
            raise ParseError(f"{path}: line {lineno} needs country,pop")
        code = registry.resolve(row[0])
        if code is None:
            raise UnknownCountryError(row[0], str(path))
        try:
            value = float(row[1])
        except ValueError:
            raise ParseError(f"{path}: non-numeric population {row[1]!r} on line {lineno}") from None
        i = registry.index(code)
        pop[i] = value if np.isnan(pop[i]) else pop[i] + value
    if np.isnan(pop).any():
        missing = [registry.codes[i] for i in np.flatnonzero(np.isnan(pop))]
        raise InputError(f"{path}: population missing for {missing[:10]}")
    return PopulationVector(registry, pop)


def scenario_strict_flat(dist: DistanceMatrix, width: float = DEFAULT_WIDTH,
                         abscissa: str = "geometric") -> ScenarioDensity:
    """Uniform over [0, max distance]; a partial last bin gets pro-rated mass."""
    width = float(width)
    if not width > 0:
        raise InputError(f"bin width must be positive, got {width!r}")
    dmax = dist.max_distance
    nb = n_bins(dmax, width)
    acc = np.full(nb, width)
    acc[-1] = dmax - (nb - 1) * width
    return ScenarioDensity("strict-flat", density_from_accumulated(acc, width, abscissa))


def _ones(registry):
    v = np.ones((registry.n, registry.n))
    np.fill_diagonal(v, 0.0)
    return v


def scenario_dyad_distance(dist: DistanceMatrix, width: float = DEFAULT_WIDTH,
                           abscissa: str = "geometric") -> ScenarioDensity:
    """Binning of an all-ones off-diagonal flow matrix (the dyad-count histogram)."""
    flow = FlowMatrix(dist.registry, _ones(dist.registry), "dyad-distance")
    return ScenarioDensity("dyad-distance", bin_flows(flow, dist, width, abscissa))


def scenario_population(dist: DistanceMatrix, pop: PopulationVector, width: float = DEFAULT_WIDTH,
                        pop_weight: str = "origin", abscissa: str = "geometric") -> ScenarioDensity:
    """Binning of flow(i, j) = pop(i) (or pop(i) * pop(j) for ``product``)."""
    _check_registry_pair(pop.registry, dist.registry, "population and distance")
    # rescale by the largest population: equal populations become exact ones
    p = pop.pop / pop.pop.max()
    if pop_weight == "origin":
        v = np.repeat(p[:, None], p.size, axis=1)
    elif pop_weight == "product":
        v = np.outer(p, p)
    else:
        raise InputError(f"unknown pop_weight {pop_weight!r}; choose from {POP_WEIGHTS}")
    np.fill_diagonal(v, 0.0)
    flow = FlowMatrix(dist.registry, v, "population")
    return ScenarioDensity("population", bin_flows(flow, dist, width, abscissa), pop_weight)


def tv_distance(p, q) -> float:
    """Half the L1 distance between two mass vectors on the same grid."""
    p, q = np.asarray(p), np.asarray(q)
    if p.shape != q.shape:
        raise InputError(f"mass vectors differ in length: {p.shape} vs {q.shape}")
    return 0.5 * math.fsum(np.abs(p - q))


def compare(scenario: ScenarioDensity, empirical: BinnedDensity) -> dict:
    """TV distance and per-bin gap (empirical - scenario mass)."""
    s = scenario.binned
    if s.nbins != empirical.nbins or not np.array_equal(s.edges, empirical.edges):
        raise InputError("scenario and empirical densities are on different bin grids")
    gap = empirical.mass - s.mass
    return {
        "kind": scenario.kind,
        "tv_distance": tv_distance(empirical.mass, s.mass),
        "per_bin_gap": [float(g) for g in gap],
    }


def write_comparison(comparisons: list[dict], path, width: float) -> None:
    write_json(path, "scenario-comparison", {"width": width, "scenarios": comparisons})
