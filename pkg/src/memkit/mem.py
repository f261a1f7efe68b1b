"""Univariate short-run filter, its gradient, GMM/QML estimation and forecasts.

The short-run component follows

    xi_t = (1 - beta*) + beta1 xi_{t-1} + alpha1 x_{t-1} + gamma1 x_{t-1} D_{t-1},
    beta* = beta1 + alpha1 + gamma1 / 2,

with xi_1 = 1.  Parameters are estimated in the natural (beta1, alpha1,
gamma1) coordinates by maximising the Gamma quasi-log-likelihood, whose
first-order condition is the efficient GMM estimating equation
sum_t (eps_t - 1) a_t = 0 with a_t = grad xi_t / xi_t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .data import STATIONARITY_MARGIN, FitResult, UniParams
from .diagnostics import r_squared
from .errors import NoConvergence, NonPositiveXi, SingularA, TooFewObservations
from .optim import bfgs_minimize

__all__ = [
    "MemOptions",
    "XiState",
    "fit_mem",
    "forecast_path",
    "forecast_xi",
    "gmm_criterion",
    "quasi_loglik",
    "xi_filter",
    "xi_gradient",
]

DEFAULT_START = (0.70, 0.15, 0.05)
MIN_FIT_OBS = 100


@dataclass(frozen=True, eq=False)
class XiState:
    """Filtered path plus the zero-mean innovations of the recursion."""

    xi: np.ndarray
    v: np.ndarray
    v_minus: np.ndarray


@dataclass(frozen=True)
class MemOptions:
    gtol: float = 1e-7
    max_iter: int = 500
    start: tuple[float, float, float] | None = None


def _as_inputs(x_xi, neg) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x_xi, dtype=float)
    d = np.asarray(neg, dtype=float)
    if x.ndim != 1 or d.shape != x.shape:
        raise ValueError("x_xi and neg_indicator must be 1-D of equal length")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("x_xi must be finite and non-negative")
    if np.any((d != 0) & (d != 1)):
        raise ValueError("neg_indicator must be 0/1")
    return x, d


def _theta(params) -> np.ndarray:
    if isinstance(params, UniParams):
        return params.to_array()
    return np.asarray(params, dtype=float)


def _filter(theta: np.ndarray, x: np.ndarray, d: np.ndarray) -> np.ndarray:
    b, a, g = theta
    u = np.empty_like(x)
    u[0] = 1.0
    u[1:] = (1.0 - b - a - 0.5 * g) + a * x[:-1] + g * x[:-1] * d[:-1]
    return lfilter([1.0], [1.0, -b], u)


def _gradient(theta: np.ndarray, x: np.ndarray, d: np.ndarray, xi: np.ndarray) -> np.ndarray:
    b = theta[0]
    z = np.zeros((x.shape[0], 3))
    z[1:, 0] = xi[:-1] - 1.0
    z[1:, 1] = x[:-1] - 1.0
    z[1:, 2] = x[:-1] * d[:-1] - 0.5
    return lfilter([1.0], [1.0, -b], z, axis=0)


def _check_positive(xi: np.ndarray) -> None:
    bad = ~(xi > 0)
    if np.any(bad):
        raise NonPositiveXi(int(np.argmax(bad)))


def xi_filter(params: UniParams, x_xi, neg_indicator) -> XiState:
    x, d = _as_inputs(x_xi, neg_indicator)
    xi = _filter(_theta(params), x, d)
    _check_positive(xi)
    return XiState(xi=xi, v=x - xi, v_minus=x * d - 0.5 * xi)


def xi_gradient(params: UniParams, x_xi, neg_indicator) -> np.ndarray:
    """T x 3 matrix of d xi_t / d(beta1, alpha1, gamma1), zero at t = 1."""
    x, d = _as_inputs(x_xi, neg_indicator)
    theta = _theta(params)
    xi = _filter(theta, x, d)
    _check_positive(xi)
    return _gradient(theta, x, d, xi)


def gmm_criterion(params: UniParams, x_xi, neg_indicator) -> np.ndarray:
    """sum_t (eps_t - 1) a_t, the score of the Gamma quasi-likelihood."""
    x, d = _as_inputs(x_xi, neg_indicator)
    theta = _theta(params)
    xi = _filter(theta, x, d)
    _check_positive(xi)
    a = _gradient(theta, x, d, xi) / xi[:, None]
    return ((x / xi - 1.0)[:, None] * a).sum(axis=0)


def quasi_loglik(params: UniParams, x_xi, neg_indicator) -> float:
    """sum_t (ln eps_t - eps_t); -inf if any observation is zero."""
    x, d = _as_inputs(x_xi, neg_indicator)
    xi = _filter(_theta(params), x, d)
    _check_positive(xi)
    eps = x / xi
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(eps) - eps))


def _admissible(theta: np.ndarray) -> bool:
    bstar = theta[0] + theta[1] + 0.5 * theta[2]
    return bool(np.all(np.isfinite(theta))) and 0.0 <= bstar < 1.0 - STATIONARITY_MARGIN


def fit_mem(x_xi, neg_indicator, options: MemOptions | None = None) -> FitResult:
    """Efficient GMM (equivalently Gamma QML) fit of the short-run recursion.

    ``x_xi`` is the series already divided by mu * tau_t.  The returned
    ``FitResult`` has mu = 1 and tau = 1; the drivers in :mod:`memkit.spfit`
    rescale it to the original units.
    """
    options = options or MemOptions()
    x, d = _as_inputs(x_xi, neg_indicator)
    T = x.shape[0]
    if T < MIN_FIT_OBS:
        raise TooFewObservations(f"need at least {MIN_FIT_OBS} observations, got {T}")
    if np.ptp(x) == 0:
        raise SingularA("constant input: gradient moments are collinear")

    def objective(theta):
        if not _admissible(theta):
            return None
        xi = _filter(theta, x, d)
        if not np.all(xi > 0):
            return None
        eps = x / xi
        a = _gradient(theta, x, d, xi) / xi[:, None]
        f = float(np.mean(np.log(xi) + eps))
        g = -((eps - 1.0)[:, None] * a).mean(axis=0)
        return f, g

    def inv_outer(theta):
        xi = _filter(theta, x, d)
        a = _gradient(theta, x, d, xi) / xi[:, None]
        A = a.T @ a / T
        try:
            return np.linalg.inv(A)
        except np.linalg.LinAlgError:
            return np.eye(3)

    start = np.array(options.start if options.start is not None else DEFAULT_START, dtype=float)
    if objective(start) is None:
        start = np.array(DEFAULT_START)
    res = bfgs_minimize(objective, start, inv_hess=inv_outer, gtol=options.gtol, max_iter=options.max_iter)
    if not res.converged:
        raise NoConvergence(res.iterations, float(np.max(np.abs(res.grad))))
    theta = res.x
    params = UniParams.from_array(theta)
    xi = _filter(theta, x, d)
    eps = x / xi
    a = _gradient(theta, x, d, xi) / xi[:, None]
    A = a.T @ a / T
    sigma2 = float(np.mean((eps - 1.0) ** 2))
    if np.linalg.cond(A) > 1e12:
        raise SingularA(f"outer-product matrix is singular (cond {np.linalg.cond(A):.3g})")
    avar = sigma2 * np.linalg.inv(A)
    avar = 0.5 * (avar + avar.T)
    return FitResult(
        kind="mem",
        params=params,
        mu=1.0,
        tau=np.ones(T),
        xi=xi,
        residuals=eps,
        sigma2=sigma2,
        avar=avar,
        rsq=np.array([r_squared(x, xi)]),
        converged=True,
        iterations=res.iterations,
        x=x,
        neg=d,
    )


def forecast_xi(params: UniParams, state: XiState | float, x_last: float, neg_last: float, h: int) -> float:
    """h-step forecast of xi made at the end of the filtered sample."""
    return float(forecast_path(params, state, x_last, neg_last, h)[-1])


def forecast_path(params: UniParams, state: XiState | float, x_last: float, neg_last: float, H: int) -> np.ndarray:
    """Forecasts xi_{t+h|t} for h = 1..H."""
    if H < 1:
        raise ValueError("horizon must be >= 1")
    xi_t = float(state.xi[-1]) if isinstance(state, XiState) else float(state)
    bstar = params.beta1_star
    out = np.empty(H)
    out[0] = (1.0 - bstar) + params.beta1 * xi_t + params.alpha1 * x_last + params.gamma1 * x_last * neg_last
    for h in range(1, H):
        out[h] = (1.0 - bstar) + bstar * out[h - 1]
    return out
