"""Indicator series over dated matrices of one activity type.

Per year: total flow, short-distance share and a power-law fit of the binned
tail. Summary statistics use the population standard deviation (divisor n):
the years are the full observed period, not a sample of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._io import write_csv, write_json
from .density import DEFAULT_CUTOFF, DEFAULT_WIDTH, bin_flows, extract_tail, short_distance_share
from .errors import ComputationError, ConfigError, InputError
from .fitting import PowerLawFit, fit
from .flow_model import DistanceMatrix, FlowMatrix


@dataclass(frozen=True)
class YearResult:
    year: int
    total: float
    share: float = math.nan
    beta: float = math.nan
    r_squared: float = math.nan
    a: float = math.nan
    fit: PowerLawFit | None = None
    flag: str = ""
    per_capita: float = math.nan


@dataclass(frozen=True)
class SeriesReport:
    activity_type: str
    cutoff: float
    width: float
    method: str
    rows: tuple[YearResult, ...]
    meta: dict = field(default_factory=dict)

    @property
    def years(self) -> list[int]:
        return [r.year for r in self.rows]

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total for r in self.rows])

    @property
    def shares(self) -> np.ndarray:
        return np.array([r.share for r in self.rows])

    @property
    def betas(self) -> np.ndarray:
        return np.array([r.beta for r in self.rows])

    @property
    def r_squareds(self) -> np.ndarray:
        return np.array([r.r_squared for r in self.rows])

    def summary(self) -> dict:
        share_mean, share_sd = _mean_sd(self.shares)
        r2_mean, r2_sd = _mean_sd(self.r_squareds)
        beta_mean, beta_sd = _mean_sd(self.betas)
        return {
            "activity_type": self.activity_type,
            "years": self.years,
            "cutoff_km": self.cutoff,
            "width_km": self.width,
            "method": self.method,
            "share_mean": share_mean,
            "share_sd": share_sd,
            "r2_mean": r2_mean,
            "r2_sd": r2_sd,
            "beta_mean": beta_mean,
            "beta_sd": beta_sd,
            "flagged": {str(r.year): r.flag for r in self.rows if r.flag},
        }

    @property
    def share_mean(self):
        return self.summary()["share_mean"]

    @property
    def share_sd(self):
        return self.summary()["share_sd"]

    @property
    def r2_mean(self):
        return self.summary()["r2_mean"]

    @property
    def r2_sd(self):
        return self.summary()["r2_sd"]

    def to_csv(self, path) -> None:
        header = ["year", "total", "share", "beta", "r_squared", "a", "per_capita", "flag"]
        rows = [[r.year, r.total, r.share, r.beta, r.r_squared, r.a, r.per_capita, r.flag] for r in self.rows]
        write_csv(path, "series", header, rows)

    def to_json(self, path) -> None:
        write_json(path, "series-summary", self.summary())


def _mean_sd(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return math.nan, math.nan
    return float(v.mean()), float(v.std(ddof=0))


def build_series(matrices: Sequence[FlowMatrix], dist: DistanceMatrix, cutoff: float = DEFAULT_CUTOFF,
                 width: float = DEFAULT_WIDTH, method: str = "nonlinear", abscissa: str = "geometric",
                 population: dict | None = None) -> SeriesReport:
    """Totals, shares and tail fits per year, sorted by year.

    A year whose tail cannot be fitted is flagged and left out of the fit
    summaries; zero-total years get missing (NaN) share and fit values.
    ``population`` optionally maps year -> population for a per-capita column.
    """
    if not matrices:
        raise InputError("series needs at least one dated matrix")
    types = {m.activity_type for m in matrices}
    if len(types) != 1:
        raise ConfigError(f"series mixes activity types: {sorted(types)}")
    years = [m.year for m in matrices]
    if any(y is None for y in years):
        raise ConfigError("every matrix in a series needs a year")
    if len(set(years)) != len(years):
        raise ConfigError(f"duplicate years in series: {sorted(years)}")
    rows = []
    for m in sorted(matrices, key=lambda m: m.year):
        total = m.total
        pc = math.nan
        if population and m.year in population:
            pc = total / float(population[m.year])
        if not total > 0:
            rows.append(YearResult(m.year, total, flag="zero total", per_capita=pc))
            continue
        share = short_distance_share(m, dist, cutoff)
        try:
            f = fit(extract_tail(bin_flows(m, dist, width, abscissa)), method)
        except ComputationError as exc:
            rows.append(YearResult(m.year, total, share, flag=f"fit failed: {exc}", per_capita=pc))
            continue
        rows.append(YearResult(m.year, total, share, f.beta, f.r_squared, f.a, f, "", pc))
    return SeriesReport(types.pop(), float(cutoff), float(width), method, tuple(rows))


@dataclass(frozen=True)
class ExpTrend:
    """y = c * exp(k * t), with t = 1 at ``origin_year``."""

    c: float
    k: float
    r_squared: float
    origin_year: int
    extrapolations: tuple[tuple[int, float], ...] = ()

    def t(self, year) -> float:
        return year - self.origin_year + 1

    def predict(self, year):
        return self.c * np.exp(self.k * (np.asarray(year, dtype=np.float64) - self.origin_year + 1))

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "k": self.k,
            "r_squared": self.r_squared,
            "origin_year": self.origin_year,
            "time_encoding": "t = year - origin_year + 1",
            "extrapolations": [{"year": y, "value": v} for y, v in self.extrapolations],
        }

    def to_json(self, path) -> None:
        write_json(path, "exp-trend", self.to_dict())


def fit_exp_trend(years, values, extrapolate=()) -> ExpTrend:
    """Log-linear OLS of y on t, where t = 1 in the first year.

    R^2 is computed in log space; a constant series has R^2 = 1 by convention.
    """
    years = np.asarray(years, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if years.shape != y.shape or years.size < 3:
        raise InputError("exponential trend needs at least 3 aligned (year, value) points")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise InputError("exponential trend needs strictly positive values")
    order = np.argsort(years, kind="stable")
    years, y = years[order], y[order]
    origin = int(years[0])
    t = years - origin + 1
    ly = np.log(y)
    dt = t - t.mean()
    stt = float(dt @ dt)
    if stt == 0:
        raise InputError("exponential trend needs at least two distinct years")
    k = float(dt @ (ly - ly.mean())) / stt
    intercept = float(ly.mean() - k * t.mean())
    ss_res = float(np.sum((ly - intercept - k * t) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, 1.0 - ss_res / ss_tot)
    c = math.exp(intercept)
    trend = ExpTrend(c, k, r2, origin)
    ext = tuple((int(yr), float(trend.predict(yr))) for yr in extrapolate)
    return ExpTrend(c, k, r2, origin, ext)


@dataclass(frozen=True)
class TrendLine:
    year: int | None
    intercept: float
    slope: float


def loglog_trend_lines(fits: Sequence[PowerLawFit], totals: Sequence[float], years=None) -> list[TrendLine]:
    """Fitted power laws rescaled to absolute volume, as lines on natural-log axes.

    log(total * a * x**-beta) = log(a * total) - beta * log(x).
    """
    if len(fits) != len(totals):
        raise InputError(f"{len(fits)} fits but {len(totals)} totals")
    years = list(years) if years is not None else [None] * len(fits)
    if len(years) != len(fits):
        raise InputError("years must align with fits")
    return [TrendLine(yr, math.log(f.a * float(tot)), -f.beta) for f, tot, yr in zip(fits, totals, years)]


def write_trend_lines(lines: Sequence[TrendLine], path) -> None:
    write_csv(path, "loglog-trend-lines", ["year", "intercept", "slope"],
              [[ln.year if ln.year is not None else "", ln.intercept, ln.slope] for ln in lines])
