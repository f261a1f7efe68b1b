"""Alternating estimation of the semi-nonparametric models.

mu is fixed once at the sample mean; starting from xi = 1 the driver
alternates (1) kernel smoothing of x / (mu xi) to get tau and (2) GMM
estimation of the short-run recursion on x / (mu tau), until the sup-norm
relative change of both tau and theta falls below ``outer_tol``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .data import AlignedPanel, FitResult, ObservationSeries
from .diagnostics import r_squared
from .errors import MemError, NoOuterConvergence, TooFewObservations
from .mem import DEFAULT_START, MemOptions, fit_mem, forecast_path
from .smoother import SmootherConfig, nw_smooth, precision_weighted_target
from .vmem import VecOptions, default_start, vforecast_path, vgmm_fit

__all__ = [
    "SpFitOptions",
    "fit_base_mem",
    "fit_base_vmem",
    "fit_spmem",
    "fit_spvmem",
    "forecast_mean",
]

log = logging.getLogger(__name__)

MIN_SP_OBS = 300


@dataclass(frozen=True)
class SpFitOptions:
    smoother: SmootherConfig = field(default_factory=SmootherConfig)
    max_outer_iter: int = 50
    outer_tol: float = 1e-5
    mem: MemOptions = field(default_factory=MemOptions)
    vec: VecOptions = field(default_factory=VecOptions)
    verbose: bool = False

    def __post_init__(self):
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be >= 1")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")


def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    scale = float(np.max(np.abs(old)))
    return float(np.max(np.abs(new - old))) / (scale if scale > 0 else 1.0)


def fit_base_mem(series: ObservationSeries, options: MemOptions | None = None) -> FitResult:
    """Base model (tau = 1): mu from the sample mean, GMM on x / mu."""
    x = series.values
    mu = float(x.mean())
    fit = fit_mem(x / mu, series.neg_indicator, options)
    return replace(
        fit,
        kind="mem",
        mu=mu,
        x=x,
        dates=series.dates,
        labels=(series.label,),
        rsq=np.array([r_squared(x, mu * fit.xi)]),
    )


def fit_base_vmem(panel: AlignedPanel, options: VecOptions | None = None) -> FitResult:
    X = panel.X
    mu = X.mean(axis=0)
    fit = vgmm_fit(X / mu, panel.neg_indicator, options)
    rsq = np.array([r_squared(X[:, i], mu[i] * fit.xi[:, i]) for i in range(panel.K)])
    return replace(fit, kind="vmem", mu=mu, x=X, dates=panel.dates, labels=panel.labels, rsq=rsq)


def _inner_uni(x_xi, d, opts: MemOptions, start):
    try:
        return fit_mem(x_xi, d, replace(opts, start=tuple(start)))
    except MemError:
        log.debug("warm-started inner fit failed; retrying from the default start")
        return fit_mem(x_xi, d, replace(opts, start=None))


def fit_spmem(series: ObservationSeries, options: SpFitOptions | None = None) -> FitResult:
    options = options or SpFitOptions()
    x = series.values
    d = series.neg_indicator
    T = x.shape[0]
    if T < MIN_SP_OBS:
        raise TooFewObservations(f"need at least {MIN_SP_OBS} observations, got {T}")
    mu = float(x.mean())
    xi = np.ones(T)
    tau_prev = np.ones(T)
    theta_prev = np.array(options.mem.start or DEFAULT_START, dtype=float)
    trace = []
    converged = False
    fit = None
    for it in range(1, options.max_outer_iter + 1):
        tau = nw_smooth(x / (mu * xi), options.smoother)
        fit = _inner_uni(x / (mu * tau), d, options.mem, theta_prev)
        xi = fit.xi
        theta = fit.theta
        d_tau = _rel_change(tau, tau_prev)
        d_theta = _rel_change(theta, theta_prev)
        trace.append({"iteration": it, "tau_change": d_tau, "theta_change": d_theta})
        if options.verbose:
            log.info("outer %d: tau change %.3e, theta change %.3e", it, d_tau, d_theta)
        tau_prev, theta_prev = tau, theta
        if max(d_tau, d_theta) < options.outer_tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"alternating estimation stopped after {options.max_outer_iter} iterations",
            NoOuterConvergence,
            stacklevel=2,
        )
    return replace(
        fit,
        kind="spmem",
        mu=mu,
        tau=tau,
        x=x,
        dates=series.dates,
        labels=(series.label,),
        rsq=np.array([r_squared(x, mu * tau * xi)]),
        converged=converged,
        outer_iterations=len(trace),
        diagnostics={"outer_trace": trace, "bandwidth_days": options.smoother.bandwidth_days},
    )


def _inner_vec(X_xi, d, opts: VecOptions, start):
    try:
        return vgmm_fit(X_xi, d, replace(opts, start=tuple(start)))
    except MemError:
        log.debug("warm-started inner fit failed; retrying from the default start")
        return vgmm_fit(X_xi, d, replace(opts, start=None))


def fit_spvmem(panel: AlignedPanel, options: SpFitOptions | None = None) -> FitResult:
    options = options or SpFitOptions()
    X = panel.X
    d = panel.neg_indicator
    T, K = X.shape
    if T < MIN_SP_OBS:
        raise TooFewObservations(f"need at least {MIN_SP_OBS} observations, got {T}")
    if K < 2:
        raise ValueError("fit_spvmem needs K >= 2 series")
    mu = X.mean(axis=0)
    Xi = np.ones((T, K))
    sig_diag = np.ones(K)
    tau_prev = np.ones(T)
    theta_prev = np.array(options.vec.start, dtype=float) if options.vec.start else default_start(K)
    trace = []
    converged = False
    fit = None
    for it in range(1, options.max_outer_iter + 1):
        target = precision_weighted_target(X / (mu * Xi), sig_diag)
        tau = nw_smooth(target, options.smoother)
        fit = _inner_vec(X / (mu[None, :] * tau[:, None]), d, options.vec, theta_prev)
        Xi = fit.xi
        sig_diag = np.diag(fit.sigma2).copy()
        theta = fit.theta
        d_tau = _rel_change(tau, tau_prev)
        d_theta = _rel_change(theta, theta_prev)
        trace.append({"iteration": it, "tau_change": d_tau, "theta_change": d_theta})
        if options.verbose:
            log.info("outer %d: tau change %.3e, theta change %.3e", it, d_tau, d_theta)
        tau_prev, theta_prev = tau, theta
        if max(d_tau, d_theta) < options.outer_tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"alternating estimation stopped after {options.max_outer_iter} iterations",
            NoOuterConvergence,
            stacklevel=2,
        )
    fitted = tau[:, None] * mu[None, :] * Xi
    rsq = np.array([r_squared(X[:, i], fitted[:, i]) for i in range(K)])
    diagnostics = dict(fit.diagnostics)
    diagnostics.update({"outer_trace": trace, "bandwidth_days": options.smoother.bandwidth_days})
    return replace(
        fit,
        kind="spvmem",
        mu=mu,
        tau=tau,
        x=X,
        dates=panel.dates,
        labels=panel.labels,
        rsq=rsq,
        converged=converged,
        outer_iterations=len(trace),
        diagnostics=diagnostics,
    )


def forecast_mean(fit: FitResult, H: int) -> np.ndarray:
    """mu_{T+h|T} = tau_T * mu * xi_{T+h|T} for h = 1..H (tau held at its last value).

    Returns an H-vector for univariate fits and an H x K array otherwise.
    """
    if H < 1:
        raise ValueError("horizon must be >= 1")
    tau_T = float(fit.tau[-1])
    neg_T = float(fit.neg[-1])
    if fit.is_vector:
        xi_T = fit.xi[-1]
        x_T = fit.residuals[-1] * xi_T
        path = vforecast_path(fit.params, xi_T, x_T, neg_T, H)
        return tau_T * np.asarray(fit.mu)[None, :] * path
    xi_T = float(fit.xi[-1])
    x_T = float(fit.residuals[-1]) * xi_T
    return tau_T * fit.mu * forecast_path(fit.params, xi_T, x_T, neg_T, H)
