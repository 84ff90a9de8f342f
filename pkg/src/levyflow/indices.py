"""Multiplex activity indices built from per-type flow matrices.

* THM: cell-wise sum of person-unit mobility matrices.
* THC: each communication matrix normalized, then averaged with equal weight.
* THA: weighted sum of the normalized THM and THC indices (default 0.6 / 0.4).

The default normalization divides a matrix by its total ("sum"); "max"
divides by the largest cell and is offered for sensitivity analysis only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._io import write_json
from .errors import EmptyDistributionError, InputError, RegistryMismatchError
from .flow_model import FlowMatrix

DEFAULT_THA_WEIGHTS = (0.6, 0.4)
NORMALIZATIONS = ("sum", "max")


@dataclass(frozen=True)
class IndexSpec:
    """Provenance of an index: component labels, weights and normalization."""

    label: str
    components: tuple[str, ...]
    weights: tuple[float, ...]
    normalization: str

    def __post_init__(self):
        if len(self.components) != len(self.weights):
            raise InputError("one weight per component required")
        if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
            raise InputError(f"index weights must be positive, got {self.weights}")

    def to_dict(self) -> dict:
        return {"label": self.label, "components": list(self.components),
                "weights": list(self.weights), "normalization": self.normalization}


def _name(m: FlowMatrix) -> str:
    return m.activity_type if m.year is None else f"{m.activity_type} {m.year}"


def _common_registry(mats: Sequence[FlowMatrix]):
    reg = mats[0].registry
    for m in mats[1:]:
        if m.registry != reg:
            raise RegistryMismatchError(f"{_name(m)} is on a different registry than {_name(mats[0])}")
    return reg


def _common_year(mats):
    years = {m.year for m in mats}
    return years.pop() if len(years) == 1 else None


def normalize(m: FlowMatrix, how: str = "sum") -> np.ndarray:
    if how not in NORMALIZATIONS:
        raise InputError(f"unknown normalization {how!r}; choose from {NORMALIZATIONS}")
    denom = m.total if how == "sum" else float(m.values.max())
    if not denom > 0:
        raise EmptyDistributionError(f"component {_name(m)!r} has zero total; cannot normalize")
    return m.values / denom


def _with_spec(values, registry, label, year, units, spec: IndexSpec) -> FlowMatrix:
    return FlowMatrix(registry, values, label, year, units, {"provenance": spec.to_dict()})


def build_thm_index(mobility: Sequence[FlowMatrix]) -> FlowMatrix:
    """Cell-wise sum of mobility matrices; all must be in persons."""
    if not mobility:
        raise InputError("THM index needs at least one mobility matrix")
    reg = _common_registry(mobility)
    for m in mobility:
        if m.units != "persons":
            raise InputError(f"THM component {_name(m)!r} has units {m.units!r}, expected 'persons'")
    values = np.zeros((reg.n, reg.n))
    for m in mobility:
        values += m.values
    spec = IndexSpec("THM", tuple(_name(m) for m in mobility), (1.0,) * len(mobility), "none")
    return _with_spec(values, reg, "THM", _common_year(mobility), "persons", spec)


def build_thc_index(comm: Sequence[FlowMatrix], normalization: str = "sum") -> FlowMatrix:
    """Equal-weight mean of normalized communication matrices."""
    if not comm:
        raise InputError("THC index needs at least one communication matrix")
    reg = _common_registry(comm)
    values = np.zeros((reg.n, reg.n))
    for m in comm:
        values += normalize(m, normalization)
    values /= len(comm)
    spec = IndexSpec("THC", tuple(_name(m) for m in comm), (1.0 / len(comm),) * len(comm), normalization)
    return _with_spec(values, reg, "THC", _common_year(comm), "share", spec)


def build_tha_index(thm: FlowMatrix, thc: FlowMatrix, weights=DEFAULT_THA_WEIGHTS,
                    normalization: str = "sum") -> FlowMatrix:
    """weights[0] * normalize(thm) + weights[1] * normalize(thc).

    Weights are rescaled to sum to one so the output total stays 1.
    """
    if thm.registry != thc.registry:
        raise RegistryMismatchError("THM and THC indices are on different registries")
    w_m, w_c = (float(w) for w in weights)
    if not (w_m > 0 and w_c > 0 and math.isfinite(w_m + w_c)):
        raise InputError(f"index weights must be positive, got {tuple(weights)}")
    w_m, w_c = w_m / (w_m + w_c), w_c / (w_m + w_c)
    spec = IndexSpec("THA", (_name(thm), _name(thc)), (w_m, w_c), normalization)
    values = w_m * normalize(thm, normalization) + w_c * normalize(thc, normalization)
    return _with_spec(values, thm.registry, "THA", _common_year([thm, thc]), "share", spec)


def component_shares(mats: Sequence[FlowMatrix]) -> dict[str, float]:
    """Each component's share of the summed total (the THM 'individual weight')."""
    totals = {_name(m): m.total for m in mats}
    grand = sum(totals.values())
    if not grand > 0:
        raise EmptyDistributionError("components have zero combined total")
    return {k: v / grand for k, v in totals.items()}


def write_provenance(index: FlowMatrix, path) -> None:
    write_json(path, "index-provenance", dict(index.meta["provenance"]))
