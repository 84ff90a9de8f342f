import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyflow import bin_flows, extract_tail, short_distance_share
from levyflow.density import bin_abscissae, density_from_accumulated, n_bins, tail_of
from levyflow.errors import EmptyDistributionError, InputError, InsufficientTailError
from conftest import make_pair
from oracles import brute_force_bins, brute_force_share, random_instance


def test_bin_edges_are_half_open():
    # distances exactly on edges go to the bin they open
    flow = np.array([[0, 1, 2], [4, 0, 8], [16, 32, 0]], dtype=float)
    dist = np.array([[0, 500, 1000], [500, 0, 1500], [1000, 1500, 0]], dtype=float)
    b = bin_flows(*make_pair(flow, dist), 500)
    assert b.nbins == 3
    assert list(b.accumulated) == [0.0, 1 + 4, 2 + 16 + 8 + 32]


def test_n_bins():
    assert n_bins(19_500, 500) == 39
    assert n_bins(19_500.000001, 500) == 40
    assert n_bins(0.3, 0.1) == 3
    assert n_bins(1e-9, 500) == 1


def test_abscissae():
    edges = np.array([0.0, 500, 1000, 1500])
    assert list(bin_abscissae(edges, "midpoint")) == [250, 750, 1250]
    g = bin_abscissae(edges)
    assert g[0] == 250 and g[1] == pytest.approx(math.sqrt(500 * 1000))
    with pytest.raises(InputError):
        bin_abscissae(edges, "median")


def test_tail_is_right_of_leftmost_maximum():
    x = np.arange(1.0, 8.0)
    y = np.array([1, 5, 5, 3, 0, 2, 1], dtype=float)
    t = tail_of(x, y)
    assert t.peak_index == 1
    assert list(t.indices) == [2, 3, 5, 6]
    assert list(tail_of(x, y, inclusive=True).indices) == [1, 2, 3, 5, 6]
    with pytest.raises(InsufficientTailError):
        tail_of(x, np.array([0, 0, 0, 0, 0, 1, 2.0]))


def test_empty_distribution():
    with pytest.raises(EmptyDistributionError):
        density_from_accumulated(np.zeros(4), 500)
    flow, dist = random_instance(np.random.default_rng(0), 5)
    with pytest.raises(EmptyDistributionError):
        bin_flows(*make_pair(np.zeros_like(flow), dist))


def test_bad_width(small_pair):
    for w in (0, -5, float("inf")):
        with pytest.raises(InputError):
            bin_flows(*small_pair, w)


def test_share_matches_oracle(rng):
    for _ in range(20):
        flow, dist = random_instance(rng, int(rng.integers(2, 15)))
        fm, dm = make_pair(flow, dist)
        for cutoff in (500.0, 5000.0, float(dist.max())):
            assert short_distance_share(fm, dm, cutoff) == pytest.approx(brute_force_share(flow, dist, cutoff), rel=1e-14)
        assert short_distance_share(fm, dm, float(dist.max())) == 1.0


def test_share_cutoff_validation(small_pair):
    with pytest.raises(InputError):
        short_distance_share(*small_pair, 0)


def test_csv_has_schema_line(tmp_path, small_pair):
    b = bin_flows(*small_pair)
    b.to_csv(tmp_path / "b.csv")
    extract_tail(b, inclusive=True).to_csv(tmp_path / "t.csv")
    for name in ("b.csv", "t.csv"):
        assert (tmp_path / name).read_text().startswith("# levyflow-schema: ")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 20), width=st.sampled_from([1.0, 100.0, 333.0, 500.0]))
def test_binning_properties(seed, n, width):
    rng = np.random.default_rng(seed)
    flow, dist = random_instance(rng, n, width)
    b = bin_flows(*make_pair(flow, dist), width)
    acc, _, _ = brute_force_bins(flow, dist, width)
    assert np.array_equal(b.accumulated, acc)
    assert abs(math.fsum(b.mass) - 1.0) <= 1e-12
    assert (b.nbins - 1) * width < dist.max() <= b.nbins * width
    assert np.all(b.density >= 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1e9))
def test_binning_scale_free(seed, scale):
    rng = np.random.default_rng(seed)
    flow, dist = random_instance(rng, 10)
    b0 = bin_flows(*make_pair(flow, dist))
    b1 = bin_flows(*make_pair(flow * scale, dist))
    np.testing.assert_allclose(b1.mass, b0.mass, rtol=1e-13, atol=1e-300)
