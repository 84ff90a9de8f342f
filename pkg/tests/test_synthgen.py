import json

import numpy as np
import pytest

from levyflow import SynthSpec, bin_flows, sample_levy_flows
from levyflow.errors import InputError
from levyflow.synthgen import corrupt, dyad_probabilities, expected_flows, uniform_distances, write_spec


def test_reproducible():
    a, da = sample_levy_flows(SynthSpec(n=30, n_moves=10_000, seed=11))
    b, db = sample_levy_flows(SynthSpec(n=30, n_moves=10_000, seed=11))
    c, _ = sample_levy_flows(SynthSpec(n=30, n_moves=10_000, seed=12))
    assert np.array_equal(a.values, b.values) and np.array_equal(da.values, db.values)
    assert not np.array_equal(a.values, c.values)
    assert a.total == 10_000
    assert a.meta["spec"]["rng"] == "numpy.random.PCG64"


def test_stratified_distances_are_marginally_uniform():
    rng = np.random.default_rng(0)
    draws = np.concatenate([uniform_distances(5, 100, 1100, rng)[np.triu_indices(5, 1)] for _ in range(4000)])
    assert draws.min() >= 100 and draws.max() <= 1100
    hist, _ = np.histogram(draws, bins=10, range=(100, 1100))
    assert np.all(np.abs(hist / draws.size - 0.1) < 0.005)


def test_peak_allocation():
    spec = SynthSpec(n=50, true_beta=2.0, peak_mass=0.4)
    _, dist = sample_levy_flows(spec)
    p = dyad_probabilities(dist, 2.0, 0.4, 500)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    first = (dist.values < 500) & ~np.eye(50, dtype=bool)
    assert p[first].sum() == pytest.approx(0.4)
    b = bin_flows(expected_flows(spec, dist), dist)
    assert int(np.argmax(b.mass)) == 0


def test_peak_zero_is_pure_power_law():
    _, dist = sample_levy_flows(SynthSpec(n=20))
    p = dyad_probabilities(dist, 1.3, 0.0, 500)
    off = ~np.eye(20, dtype=bool)
    ratio = p[off] * dist.values[off] ** 1.3
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


def test_spec_validation():
    for kw in ({"n": 1}, {"peak_mass": 1.0}, {"n_moves": 0}, {"d_min": 0}, {"distance_model": "x"}):
        with pytest.raises(InputError):
            SynthSpec(**kw)


def test_matrix_model_uses_given_distances():
    _, dist = sample_levy_flows(SynthSpec(n=15))
    f, d2 = sample_levy_flows(SynthSpec(distance_model="matrix", n_moves=1000), dist)
    assert d2 is dist and f.registry == dist.registry
    with pytest.raises(InputError):
        sample_levy_flows(SynthSpec(distance_model="matrix"))


def test_corrupt():
    f, _ = sample_levy_flows(SynthSpec(n=20, n_moves=100_000))
    nnz = np.count_nonzero(f.values)
    c = corrupt(f, 0.25, seed=1)
    assert np.count_nonzero(c.values) == nnz - round(0.25 * nnz)
    assert np.all((c.values == 0) | (c.values == f.values))
    assert np.count_nonzero(corrupt(f, 0.999999, seed=1).values) == 1
    assert np.array_equal(corrupt(f, 0.0).values, f.values)


def test_write_spec(tmp_path):
    write_spec(SynthSpec(seed=4), tmp_path / "s.json")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["seed"] == 4 and doc["schema"] == "synth-spec/1"
