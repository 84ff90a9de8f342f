"""Country registry, dyadic flow matrices and the distance matrix.

Everything is aligned to one canonical, ordered country list. Flow files come
either as a dense labeled matrix (header row and first column hold country
codes) or in long format with the columns ``origin,destination,value``.
Historical codes are resolved through the registry's remap table; countries
absent from a file are zero-filled.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import read_csv_rows, write_csv
from .errors import (
    ConfigError,
    InputError,
    NegativeFlowError,
    ParseError,
    RegistryMismatchError,
    UnknownCountryError,
)

LONG_HEADER = ["origin", "destination", "value"]
MISSING_MARKERS = {"", "na", "nan", "."}
UNITS = ("persons", "minutes", "currency", "rank-weight", "share")


@dataclass(frozen=True)
class CountryRegistry:
    """Ordered canonical country codes plus a historical-code remap table."""

    codes: tuple[str, ...]
    remap: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        codes = tuple(str(c) for c in self.codes)
        if len(codes) < 2:
            raise ConfigError("registry needs at least two countries")
        if len(set(codes)) != len(codes):
            dup = sorted({c for c in codes if codes.count(c) > 1})
            raise ConfigError(f"duplicate registry codes: {dup}")
        index = {c: i for i, c in enumerate(codes)}
        remap = dict(self.remap)
        for old, new in remap.items():
            if new not in index:
                raise ConfigError(f"remap target {new!r} (for {old!r}) is not a registry code")
            if old in index and old != new:
                raise ConfigError(f"ambiguous remap: {old!r} is itself canonical but maps to {new!r}")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "remap", MappingProxyType(remap))
        object.__setattr__(self, "_index", index)

    def __eq__(self, other):
        if not isinstance(other, CountryRegistry):
            return NotImplemented
        return self.codes == other.codes and dict(self.remap) == dict(other.remap)

    def __hash__(self):
        return hash(self.codes)

    @property
    def n(self) -> int:
        return len(self.codes)

    def index(self, code: str) -> int:
        return self._index[code]

    def resolve(self, code: str) -> str | None:
        """Canonical code for ``code`` or None if it cannot be resolved."""
        code = code.strip()
        if code in self._index:
            return code
        return self.remap.get(code)

    def permuted(self, order: Sequence[int]) -> "CountryRegistry":
        return CountryRegistry(tuple(self.codes[i] for i in order), self.remap)


def _check_registry_pair(a: CountryRegistry, b: CountryRegistry, what="inputs"):
    if a != b:
        raise RegistryMismatchError(f"{what} do not share a country registry")


def _require_same_registry(a, b, what="inputs"):
    _check_registry_pair(a.registry, b.registry, what)


@dataclass(frozen=True, eq=False)
class FlowMatrix:
    """Nonnegative n x n dyadic flows (row = origin, column = destination).

    ``year`` is None for undated data. ``meta`` carries ingestion counters and
    provenance; it never affects numerical results.
    """

    registry: CountryRegistry
    values: np.ndarray
    activity_type: str = "flow"
    year: int | None = None
    units: str = "persons"
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True, order="C")
        n = self.registry.n
        if v.shape != (n, n):
            raise InputError(f"flow matrix shape {v.shape} does not match registry size {n}")
        if not np.all(np.isfinite(v)):
            raise InputError("flow matrix contains non-finite values")
        if np.any(v < 0):
            i, j = np.argwhere(v < 0)[0]
            raise NegativeFlowError(v[i, j], self.registry.codes[i], self.registry.codes[j])
        if np.any(np.diag(v) != 0):
            raise InputError("flow matrix has nonzero diagonal; transnational flows only")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def replace(self, **changes) -> "FlowMatrix":
        return dataclasses.replace(self, **changes)

    def long_rows(self) -> list[tuple[str, str, float]]:
        """Nonzero cells as (origin, destination, value), row-major."""
        codes = self.registry.codes
        return [(codes[i], codes[j], float(self.values[i, j])) for i, j in zip(*np.nonzero(self.values))]

    def permuted(self, order: Sequence[int]) -> "FlowMatrix":
        order = np.asarray(order)
        return self.replace(registry=self.registry.permuted(order), values=self.values[np.ix_(order, order)])


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric n x n distances in km; the diagonal is ignored (stored as 0)."""

    registry: CountryRegistry
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True, order="C")
        n = self.registry.n
        if v.shape != (n, n):
            raise InputError(f"distance matrix shape {v.shape} does not match registry size {n}")
        np.fill_diagonal(v, 0.0)
        off = ~np.eye(n, dtype=bool)
        if not np.all(np.isfinite(v[off])) or np.any(v[off] <= 0):
            raise InputError("off-diagonal distances must be finite and > 0")
        if not np.allclose(v, v.T, rtol=1e-9, atol=0.0):
            i, j = np.argwhere(~np.isclose(v, v.T, rtol=1e-9, atol=0.0))[0]
            raise InputError(
                f"distance matrix not symmetric at ({self.registry.codes[i]}, {self.registry.codes[j]})"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def max_distance(self) -> float:
        return float(self.values.max())

    def offdiag(self) -> np.ndarray:
        n = self.registry.n
        return self.values[~np.eye(n, dtype=bool)]

    def permuted(self, order: Sequence[int]) -> "DistanceMatrix":
        order = np.asarray(order)
        return DistanceMatrix(self.registry.permuted(order), self.values[np.ix_(order, order)])


@dataclass(frozen=True)
class LabeledMatrix:
    """A raw matrix whose row/column labels are not yet on the canonical set."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    activity_type: str = "flow"
    year: int | None = None
    units: str = "persons"


# -- registry / remap files ---------------------------------------------------


def load_remap(path) -> dict[str, str]:
    """Read a ``historical,canonical`` CSV. Conflicting entries are an error."""
    rows = read_csv_rows(path)
    if rows and [c.strip().lower() for c in rows[0][:2]] == ["historical", "canonical"]:
        rows = rows[1:]
    remap: dict[str, str] = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) < 2:
            raise ParseError(f"{path}: remap line {lineno} needs two columns")
        old, new = row[0].strip(), row[1].strip()
        if old in remap and remap[old] != new:
            raise ConfigError(f"ambiguous remap: {old!r} -> {remap[old]!r} and {new!r}")
        remap[old] = new
    return remap


def load_registry(path, remap_path=None) -> CountryRegistry:
    """Read registry codes (one per line, optional ``code`` header)."""
    rows = read_csv_rows(path)
    codes = [r[0].strip() for r in rows if r and r[0].strip()]
    if codes and codes[0].lower() == "code":
        codes = codes[1:]
    remap = load_remap(remap_path) if remap_path else {}
    return CountryRegistry(tuple(codes), remap)


def write_registry(registry: CountryRegistry, path) -> None:
    write_csv(path, "registry", ["code"], [[c] for c in registry.codes])


# -- flow ingestion -----------------------------------------------------------


def _parse_value(text: str, where: str) -> float:
    s = text.strip()
    if s.lower() in MISSING_MARKERS:
        return 0.0
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"non-numeric cell {text!r} at {where}") from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite cell {text!r} at {where}")
    return v


def _assemble(triples: Iterable, registry: CountryRegistry, strict: bool, source: str):
    """Accumulate (origin, destination, value, row, col) onto the registry."""
    n = registry.n
    values = np.zeros((n, n))
    dropped_cells = 0
    dropped_mass = 0.0
    diag_zeroed = 0
    for origin, dest, v, row, col in triples:
        if v < 0:
            raise NegativeFlowError(v, row, col, source)
        o, d = registry.resolve(origin), registry.resolve(dest)
        if o is None or d is None:
            bad = origin if o is None else dest
            if strict:
                raise UnknownCountryError(bad, f"{source}, cell ({row}, {col})")
            dropped_cells += 1
            dropped_mass += v
            continue
        i, j = registry.index(o), registry.index(d)
        if i == j:
            if v != 0:
                diag_zeroed += 1
            continue
        values[i, j] += v
    if dropped_cells:
        warnings.warn(
            f"{source}: dropped {dropped_cells} cells ({dropped_mass:g} flow) with unresolvable codes",
            stacklevel=3,
        )
    meta = {"source": source, "dropped_cells": dropped_cells, "dropped_flow": dropped_mass,
            "diagonal_zeroed": diag_zeroed}
    return values, meta


def _dense_triples(row_labels, col_labels, values):
    values = np.asarray(values, dtype=np.float64)
    for r, rl in enumerate(row_labels):
        for c, cl in enumerate(col_labels):
            v = values[r, c]
            if not math.isfinite(v):
                raise InputError(f"non-finite value at ({rl}, {cl})")
            yield rl, cl, float(v), rl, cl


def standardize(matrix, registry: CountryRegistry, strict: bool = True) -> FlowMatrix:
    """Expand/contract a labeled matrix onto the canonical registry.

    Historical codes are merged into their successors (cell-wise sums); cells
    that land on the diagonal are zeroed and counted in ``meta``. A
    :class:`FlowMatrix` input is re-standardized through its own codes, which
    makes the operation idempotent.
    """
    if isinstance(matrix, FlowMatrix):
        labels = matrix.registry.codes
        matrix = LabeledMatrix(labels, labels, matrix.values, matrix.activity_type, matrix.year, matrix.units)
    values = np.asarray(matrix.values)
    if values.shape != (len(matrix.row_labels), len(matrix.col_labels)):
        raise InputError("labeled matrix shape does not match its labels")
    triples = _dense_triples(matrix.row_labels, matrix.col_labels, values)
    out, meta = _assemble(triples, registry, strict, "matrix")
    return FlowMatrix(registry, out, matrix.activity_type, matrix.year, matrix.units, meta)


def load_flow_matrix(path, registry: CountryRegistry, *, strict: bool = True,
                     activity_type: str = "flow", year: int | None = None,
                     units: str = "persons") -> FlowMatrix:
    """Load a dense labeled or long-format flow CSV onto ``registry``."""
    rows = read_csv_rows(path)
    source = str(path)
    if not rows:
        raise ParseError(f"{source}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:3] == LONG_HEADER:
        triples = _long_triples(rows[1:], source)
    else:
        triples = _dense_file_triples(rows, source)
    values, meta = _assemble(triples, registry, strict, source)
    return FlowMatrix(registry, values, activity_type, year, units, meta)


def _long_triples(rows, source):
    for lineno, row in enumerate(rows, start=2):
        if len(row) < 3:
            raise ParseError(f"{source}: line {lineno} needs origin,destination,value")
        o, d = row[0].strip(), row[1].strip()
        yield o, d, _parse_value(row[2], f"{source} line {lineno}"), o, d


def _dense_file_triples(rows, source):
    cols = [c.strip() for c in rows[0][1:]]
    for lineno, row in enumerate(rows[1:], start=2):
        label = row[0].strip()
        cells = row[1:]
        if len(cells) > len(cols):
            raise ParseError(f"{source}: line {lineno} has more cells than header columns")
        for c, text in enumerate(cells):
            v = _parse_value(text, f"{source} cell ({label}, {cols[c]})")
            yield label, cols[c], v, label, cols[c]


def write_flow_long(flow: FlowMatrix, path) -> None:
    """Emit nonzero cells in canonical long format."""
    write_csv(path, "flow-long", LONG_HEADER, flow.long_rows())


def write_flow_dense(flow: FlowMatrix, path) -> None:
    codes = flow.registry.codes
    write_csv(path, "flow-dense", [""] + list(codes),
              [[c] + [float(v) for v in row] for c, row in zip(codes, flow.values)])


def rank_to_weight(ranks, registry: CountryRegistry, *, activity_type: str = "online friendships",
                   year: int | None = None) -> FlowMatrix:
    """Use top-five partner ranks (5 = strongest, 0 = unranked) as flow weights."""
    r = np.asarray(ranks)
    if r.shape != (registry.n, registry.n):
        raise InputError(f"rank matrix shape {r.shape} does not match registry size {registry.n}")
    rf = r.astype(np.float64)
    bad = ~np.isin(rf, [0, 1, 2, 3, 4, 5])
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InputError(f"rank {r[i, j]!r} at ({registry.codes[i]}, {registry.codes[j]}) outside 0..5")
    diag = int(np.count_nonzero(np.diag(rf)))
    np.fill_diagonal(rf, 0.0)
    per_row = np.count_nonzero(rf, axis=1)
    if per_row.max() > 5:
        i = int(np.argmax(per_row))
        raise InputError(f"row {registry.codes[i]} ranks {per_row[i]} partners; at most five allowed")
    return FlowMatrix(registry, rf, activity_type, year, "rank-weight", {"diagonal_zeroed": diag})


# -- distances ----------------------------------------------------------------


def load_distance_matrix(path, registry: CountryRegistry) -> DistanceMatrix:
    """Load a dense labeled distance CSV (km). Every registry country must appear."""
    rows = read_csv_rows(path)
    source = str(path)
    if not rows:
        raise ParseError(f"{source}: empty file")

    def resolve(label):
        code = registry.resolve(label)
        if code is None:
            raise UnknownCountryError(label, source)
        return registry.index(code)

    cols = [resolve(c) for c in rows[0][1:]]
    if len(set(cols)) != len(cols):
        raise ConfigError(f"{source}: several column labels resolve to the same country")
    n = registry.n
    v = np.full((n, n), np.nan)
    seen_rows = set()
    for row in rows[1:]:
        i = resolve(row[0])
        if i in seen_rows:
            raise ConfigError(f"{source}: several row labels resolve to {registry.codes[i]}")
        seen_rows.add(i)
        for c, text in enumerate(row[1:]):
            j = cols[c]
            if i == j:
                continue
            s = text.strip()
            if s.lower() in MISSING_MARKERS:
                continue
            try:
                v[i, j] = float(s)
            except ValueError:
                raise ParseError(f"non-numeric distance {text!r} at {source} cell ({row[0]}, {rows[0][c + 1]})") from None
    np.fill_diagonal(v, 0.0)
    if np.isnan(v).any():
        i, j = np.argwhere(np.isnan(v))[0]
        raise InputError(f"{source}: missing distance for ({registry.codes[i]}, {registry.codes[j]})")
    return DistanceMatrix(registry, v)


def write_distance_matrix(dist: DistanceMatrix, path) -> None:
    codes = dist.registry.codes
    write_csv(path, "distance-dense", [""] + list(codes),
              [[c] + [float(v) for v in row] for c, row in zip(codes, dist.values)])
