import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyflow import fit, fit_loglog, fit_power_law
from levyflow.errors import ConvergenceError, InputError, InsufficientDataError
from levyflow.fitting import levenberg_marquardt
from oracles import scipy_power_fit

X = np.sqrt(np.arange(1, 39) * np.arange(2, 40)) * 500.0


def test_methods_labelled():
    y = 3 * X ** -1.2
    assert fit((X, y)).method == "nonlinear-ls"
    assert fit((X, y), "loglog").method == "loglog-ols"
    with pytest.raises(InputError):
        fit((X, y), "mle")


def test_matches_scipy_on_noisy_tail():
    rng = np.random.default_rng(3)
    for beta in (0.7, 1.5, 2.3):
        y = 2.0 * X ** -beta * np.exp(rng.normal(0, 0.05, X.size))
        a_ref, b_ref = scipy_power_fit(X, y)
        f = fit_power_law((X, y))
        assert f.beta == pytest.approx(b_ref, rel=1e-6)
        assert f.a == pytest.approx(a_ref, rel=1e-5)


def test_loglog_matches_polyfit():
    rng = np.random.default_rng(4)
    y = 0.5 * X ** -1.8 * np.exp(rng.normal(0, 0.1, X.size))
    slope, intercept = np.polyfit(np.log(X), np.log(y), 1)
    f = fit_loglog((X, y))
    assert f.beta == pytest.approx(-slope, rel=1e-12)
    assert f.a == pytest.approx(math.exp(intercept), rel=1e-12)
    assert 0 <= f.r_squared <= 1


def test_r2_nonlinear_on_original_scale():
    rng = np.random.default_rng(5)
    y = 4 * X ** -1.1 * (1 + rng.normal(0, 0.02, X.size))
    f = fit_power_law((X, y))
    pred = f.a * X ** -f.beta
    r2 = 1 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2)
    assert f.r_squared == pytest.approx(r2, rel=1e-12)


def test_insufficient_points():
    with pytest.raises(InsufficientDataError):
        fit((X[:1], X[:1]))
    with pytest.raises(InsufficientDataError):
        fit((X[:3], np.array([1.0, 0.0, 1.0])))


def test_two_points_exact():
    x = np.array([100.0, 1000.0])
    f = fit((x, 5 * x ** -2.0))
    assert f.beta == pytest.approx(2.0, rel=1e-12)


def test_convergence_error_carries_best():
    def residual(t):
        return np.array([t[0] ** 2 + 1.0])

    def jac(t):
        return np.array([[2 * t[0]]])

    with pytest.raises(ConvergenceError) as info:
        levenberg_marquardt(residual, jac, [3.0], rtol=0.0, max_iter=3)
    assert info.value.best is not None


@settings(max_examples=80, deadline=None)
@given(a=st.floats(1e-6, 1e6), beta=st.floats(0.1, 4.0), n=st.integers(3, 60))
def test_recovers_any_exact_power_law(a, beta, n):
    x = np.geomspace(10.0, 2e4, n)
    y = a * x ** -beta
    for method in ("nonlinear", "loglog"):
        f = fit((x, y), method)
        assert f.beta == pytest.approx(beta, rel=1e-8)
        assert f.r_squared == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(1e-8, 1e8))
def test_fit_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    y = X ** -1.5 * np.exp(rng.normal(0, 0.1, X.size))
    f0, f1 = fit((X, y)), fit((X, y * scale))
    assert f1.beta == pytest.approx(f0.beta, abs=1e-11)
    assert f1.a == pytest.approx(f0.a * scale, rel=1e-9)
