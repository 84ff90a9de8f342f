import json
import math

import numpy as np
import pytest

from levyflow import SynthSpec, build_series, fit, fit_exp_trend, loglog_trend_lines, sample_levy_flows
from levyflow.errors import ConfigError, InputError
from levyflow.longitudinal import write_trend_lines


@pytest.fixture(scope="module")
def yearly():
    flows = []
    for k, year in enumerate(range(2000, 2005)):
        f, d = sample_levy_flows(SynthSpec(n=40, true_beta=1.5, n_moves=50_000 * (k + 1), seed=k))
        flows.append(f)
    # one shared distance matrix: reuse the first draw's geography
    d = sample_levy_flows(SynthSpec(n=40, n_moves=1, seed=0))[1]
    mats = [f.replace(values=f.values, activity_type="migrants", year=2000 + k) for k, f in enumerate(flows)]
    return mats, d


def test_series_rows(yearly):
    mats, dist = yearly
    rep = build_series(mats[::-1], dist, cutoff=5000)
    assert rep.years == [2000, 2001, 2002, 2003, 2004]
    assert list(rep.totals) == [50_000 * k for k in range(1, 6)]
    assert np.all((rep.shares > 0) & (rep.shares < 1))
    s = rep.summary()
    assert s["share_sd"] == pytest.approx(np.std(rep.shares, ddof=0))
    assert s["cutoff_km"] == 5000 and s["flagged"] == {}


def test_series_validation(yearly):
    mats, dist = yearly
    with pytest.raises(ConfigError, match="mixes"):
        build_series([mats[0], mats[1].replace(activity_type="tourists")], dist)
    with pytest.raises(ConfigError, match="duplicate"):
        build_series([mats[0], mats[0]], dist)
    with pytest.raises(ConfigError, match="year"):
        build_series([mats[0].replace(year=None)], dist)


def test_zero_year_is_flagged(yearly):
    mats, dist = yearly
    zero = mats[0].replace(values=np.zeros_like(mats[0].values), year=1999)
    rep = build_series([zero, *mats], dist)
    assert rep.rows[0].flag == "zero total" and math.isnan(rep.rows[0].share)
    assert not math.isnan(rep.share_mean)


def test_series_files(tmp_path, yearly):
    mats, dist = yearly
    rep = build_series(mats, dist)
    rep.to_csv(tmp_path / "s.csv")
    rep.to_json(tmp_path / "s.json")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "# levyflow-schema: series/1"
    assert json.loads((tmp_path / "s.json").read_text())["years"] == rep.years


def test_exp_trend_noisy_and_errors():
    rng = np.random.default_rng(0)
    years = np.arange(1990, 2010)
    y = 5.0 * np.exp(0.1 * (years - 1989) + rng.normal(0, 0.05, years.size))
    tr = fit_exp_trend(years, y)
    slope, _ = np.polyfit(years - 1989, np.log(y), 1)
    assert tr.k == pytest.approx(slope, rel=1e-10)
    assert 0.9 < tr.r_squared < 1
    with pytest.raises(InputError):
        fit_exp_trend([2000, 2001], [1, 2])
    with pytest.raises(InputError):
        fit_exp_trend([2000, 2001, 2002], [1, 0, 2])
    flat = fit_exp_trend([2000, 2001, 2002], [3, 3, 3])
    assert flat.k == 0 and flat.r_squared == 1


def test_trend_lines(tmp_path, yearly):
    mats, dist = yearly
    rep = build_series(mats, dist)
    fits = [r.fit for r in rep.rows]
    lines = loglog_trend_lines(fits, rep.totals, rep.years)
    x = 3000.0
    for ln, f, tot in zip(lines, fits, rep.totals):
        assert ln.intercept + ln.slope * math.log(x) == pytest.approx(math.log(tot * f.predict(x)))
    write_trend_lines(lines, tmp_path / "t.csv")
    with pytest.raises(InputError):
        loglog_trend_lines(fits, rep.totals[:-1])
