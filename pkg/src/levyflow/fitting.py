"""Power-law fits ``density = a * x**(-beta)`` to a tail segment.

Two estimators:

* ``nonlinear`` -- least squares on the untransformed densities (damped
  Gauss-Newton / Levenberg-Marquardt), R^2 on the original scale.
* ``loglog`` -- ordinary least squares of log(density) on log(x), R^2 in log
  space. Also used to initialize the nonlinear solver.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError, InputError, InsufficientDataError

METHOD_LABELS = {"nonlinear": "nonlinear-ls", "loglog": "loglog-ols"}
RTOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    beta: float
    r_squared: float
    method: str
    n_points: int
    x_min: float
    x_max: float
    tail_start: int | None = None
    ss_res: float = 0.0
    iterations: int = 0

    def predict(self, x):
        return self.a * np.power(np.asarray(x, dtype=np.float64), -self.beta)

    def to_dict(self, activity_type=None, year=None) -> dict:
        return {
            "activity_type": activity_type,
            "year": year,
            "method": self.method,
            "a": self.a,
            "beta": self.beta,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "tail_start": self.tail_start,
        }

    def diagnostics(self) -> dict:
        return asdict(self)


def _tail_xy(tail):
    if isinstance(tail, tuple):
        x, y = tail
        start = None
    else:
        x, y = tail.x, tail.density
        start = getattr(tail, "start_index", None)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("tail x and density must be 1-d arrays of equal length")
    if x.size < 2:
        raise InsufficientDataError(f"need at least 2 tail points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(x > 0) and np.all(y > 0)):
        raise InsufficientDataError("tail points must have finite x > 0 and density > 0")
    return x, y, start


def _r2(y, pred):
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return (1.0 if ss_res == 0.0 else -math.inf), ss_res
    return 1.0 - ss_res / ss_tot, ss_res


def _ols_loglog(x, y):
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise InsufficientDataError("tail x values must not all coincide")
    slope = float(dx @ (ly - ly.mean())) / sxx
    intercept = float(ly.mean() - slope * lx.mean())
    return intercept, slope


def fit_loglog(tail) -> PowerLawFit:
    """OLS of log(density) on log(x): beta = -slope, a = exp(intercept)."""
    x, y, start = _tail_xy(tail)
    intercept, slope = _ols_loglog(x, y)
    ly = np.log(y)
    r2, _ = _r2(ly, intercept + slope * np.log(x))
    r2 = min(max(r2, 0.0), 1.0)
    a, beta = math.exp(intercept), -slope
    ss_lin = float(np.sum((y - a * x ** -beta) ** 2))
    return PowerLawFit(a, beta, r2, METHOD_LABELS["loglog"], int(x.size), float(x.min()),
                       float(x.max()), start, ss_lin, 0)


def nl_initialize(tail) -> tuple[float, float]:
    """Starting point (a0, beta0) for the nonlinear solver: the log-log OLS estimate."""
    x, y, _ = _tail_xy(tail)
    intercept, slope = _ols_loglog(x, y)
    return math.exp(intercept), -slope


def levenberg_marquardt(residual, jacobian, theta0, rtol=RTOL, max_iter=MAX_ITER):
    """Minimize 0.5 * ||residual(theta)||^2 with Marquardt-scaled damping.

    Returns ``(theta, cost, iterations)``. Only cost-decreasing steps are
    accepted, so the returned cost never exceeds the starting cost.
    Convergence: step norm <= rtol * max(||theta||, 1), followed by undamped
    Gauss-Newton polishing while the gradient norm keeps falling. The cost is
    flat at the optimum, so only the gradient resolves theta to rounding level.
    """
    theta = np.asarray(theta0, dtype=np.float64).copy()
    r = residual(theta)
    cost = 0.5 * float(r @ r)
    J = jacobian(theta)
    H = J.T @ J
    g = J.T @ r
    lam = 1e-3
    for it in range(1, max_iter + 1):
        if not np.any(g):
            return theta, cost, it
        scale = np.maximum(np.diag(H), np.finfo(float).tiny)
        try:
            step = np.linalg.solve(H + lam * np.diag(scale), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        new = theta + step
        r_new = residual(new)
        cost_new = 0.5 * float(r_new @ r_new)
        small = np.linalg.norm(step) <= rtol * max(np.linalg.norm(theta), 1.0)
        if np.isfinite(cost_new) and cost_new < cost:
            theta, r, cost = new, r_new, cost_new
            J = jacobian(theta)
            H = J.T @ J
            g = J.T @ r
            lam = max(lam / 3.0, 1e-12)
        else:
            lam *= 4.0
        if small:
            theta, cost = _polish(residual, jacobian, theta, r, cost, J)
            return theta, cost, it
    raise ConvergenceError(
        f"Levenberg-Marquardt did not converge in {max_iter} iterations",
        best=theta,
        diagnostics={"cost": cost, "damping": lam, "gradient": g.tolist()},
    )


def _polish(residual, jacobian, theta, r, cost, J, max_steps=20):
    gnorm = np.linalg.norm(J.T @ r)
    for _ in range(max_steps):
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        if not np.any(step):
            break
        new = theta + step
        r_new = residual(new)
        J_new = jacobian(new)
        g_new = np.linalg.norm(J_new.T @ r_new)
        if not (np.all(np.isfinite(r_new)) and g_new < gnorm):
            break
        theta, r, J, gnorm = new, r_new, J_new, g_new
        cost = 0.5 * float(r @ r)
    return theta, cost


def fit_power_law(tail, rtol: float = RTOL, max_iter: int = MAX_ITER) -> PowerLawFit:
    """Nonlinear least squares of density on a * x**(-beta).

    Internally solves for (log A, beta) in ``y/s = A * (x/x0)**(-beta)`` with
    x0 the geometric mean of x and s the largest density; this is a
    reparameterization of the same objective and keeps the problem well
    conditioned for densities of any magnitude.
    """
    x, y, start = _tail_xy(tail)
    a0, beta0 = nl_initialize((x, y))
    log_x0 = float(np.mean(np.log(x)))
    z = np.log(x) - log_x0
    s = float(y.max())
    yy = y / s

    def model(theta):
        return np.exp(theta[0] - theta[1] * z)

    def residual(theta):
        return model(theta) - yy

    def jacobian(theta):
        m = model(theta)
        return np.column_stack([m, -z * m])

    theta0 = np.array([math.log(a0) - beta0 * log_x0 - math.log(s), beta0])
    try:
        theta, _, iterations = levenberg_marquardt(residual, jacobian, theta0, rtol, max_iter)
    except ConvergenceError as exc:
        th = exc.best
        exc.best = (math.exp(th[0] + math.log(s) + th[1] * log_x0), float(th[1]))
        raise
    beta = float(theta[1])
    a = math.exp(theta[0] + math.log(s) + beta * log_x0)
    r2, ss_res = _r2(y, s * model(theta))
    return PowerLawFit(a, beta, r2, METHOD_LABELS["nonlinear"], int(x.size), float(x.min()),
                       float(x.max()), start, ss_res, iterations)


def fit(tail, method: str = "nonlinear") -> PowerLawFit:
    if method in ("nonlinear", "nonlinear-ls"):
        return fit_power_law(tail)
    if method in ("loglog", "loglog-ols"):
        return fit_loglog(tail)
    raise InputError(f"unknown fit method {method!r}; choose 'nonlinear' or 'loglog'")
