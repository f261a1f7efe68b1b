"""Residual autocorrelation, portmanteau tests and fit statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConstantSeries, NonPositiveDf, SingularC0

__all__ = [
    "AcfResult",
    "LjungBoxResult",
    "acf",
    "default_n_params",
    "ljung_box",
    "ljung_box_table",
    "mv_portmanteau",
    "r_squared",
]

DEFAULT_LAGS = (5, 10, 15, 20)


@dataclass(frozen=True)
class LjungBoxResult:
    lags: int
    statistic: float
    df: int
    pvalue: float

    def to_dict(self) -> dict:
        return {"lags": self.lags, "statistic": self.statistic, "df": self.df, "pvalue": self.pvalue}


@dataclass(frozen=True, eq=False)
class AcfResult:
    lags: np.ndarray
    acf: np.ndarray
    band: float  # 1.96 / sqrt(T)

    def to_rows(self) -> list[tuple[int, float, float, float]]:
        return [(int(k), float(r), -self.band, self.band) for k, r in zip(self.lags, self.acf)]


def acf(residuals, max_lag: int) -> AcfResult:
    """Sample autocorrelations at lags 0..max_lag with +-1.96/sqrt(T) bands."""
    e = np.asarray(residuals, dtype=float)
    T = e.shape[0]
    if not 0 <= max_lag < T / 4:
        raise ValueError(f"max_lag must be in [0, T/4), got {max_lag} with T = {T}")
    u = e - e.mean()
    denom = float(u @ u)
    if denom == 0:
        raise ConstantSeries("residuals are constant")
    r = np.array([u[k:] @ u[: T - k] for k in range(max_lag + 1)]) / denom
    r[0] = 1.0
    return AcfResult(np.arange(max_lag + 1), r, 1.96 / np.sqrt(T))


def _chi2_pvalue(stat: float, df: int) -> float:
    return float(stats.chi2.sf(stat, df))


def ljung_box(residuals, lags: int, n_params: int = 0) -> LjungBoxResult:
    """Q = T(T+2) sum_{j<=lags} rho_j^2 / (T - j) against chi2(lags - n_params)."""
    e = np.asarray(residuals, dtype=float)
    T = e.shape[0]
    df = int(lags) - int(n_params)
    if lags < 1 or df < 1:
        raise NonPositiveDf(f"lags {lags} with {n_params} parameters leaves df = {df}")
    r = _acf_unchecked(e, lags)
    j = np.arange(1, lags + 1)
    Q = float(T * (T + 2) * np.sum(r * r / (T - j)))
    return LjungBoxResult(int(lags), Q, df, _chi2_pvalue(Q, df))


def _acf_unchecked(e: np.ndarray, lags: int) -> np.ndarray:
    u = e - e.mean()
    T = len(u)
    denom = float(u @ u)
    if denom == 0:
        raise ConstantSeries("residuals are constant")
    return np.array([u[k:] @ u[: T - k] for k in range(1, lags + 1)]) / denom


def mv_portmanteau(residuals, lags: int, n_params: int = 0) -> LjungBoxResult:
    """Multivariate portmanteau in the small-sample form

    Q = T^2 sum_{j<=lags} tr(C_j' C_0^-1 C_j C_0^-1) / (T - j),  df = K^2 lags - n_params.
    """
    U = np.asarray(residuals, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    T, K = U.shape
    df = K * K * int(lags) - int(n_params)
    if lags < 1 or df < 1:
        raise NonPositiveDf(f"K^2 * lags - n_params = {df}")
    U = U - U.mean(axis=0)
    C0 = U.T @ U / T
    try:
        C0inv = np.linalg.inv(C0)
    except np.linalg.LinAlgError as exc:
        raise SingularC0("lag-0 covariance is singular") from exc
    if not np.all(np.isfinite(C0inv)) or np.linalg.cond(C0) > 1e14:
        raise SingularC0("lag-0 covariance is singular")
    Q = 0.0
    for j in range(1, lags + 1):
        Cj = U[j:].T @ U[:-j] / T
        Q += np.trace(Cj.T @ C0inv @ Cj @ C0inv) / (T - j)
    Q = float(T * T * Q)
    return LjungBoxResult(int(lags), Q, df, _chi2_pvalue(Q, df))


def r_squared(observed, fitted) -> float:
    """Squared Pearson correlation between observations and fitted conditional means."""
    x = np.asarray(observed, dtype=float)
    y = np.asarray(fitted, dtype=float)
    if x.shape != y.shape:
        raise ValueError("observed and fitted must have the same length")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantSeries("r_squared needs non-constant inputs")
    xc = x - x.mean()
    yc = y - y.mean()
    r = (xc @ yc) / np.sqrt((xc @ xc) * (yc @ yc))
    return float(min(1.0, r * r))


def default_n_params(K: int = 1) -> int:
    """Short-run parameter count used for the df adjustment (mu and tau excluded)."""
    return 3 if K == 1 else K + K * K + K


def ljung_box_table(residuals, lags=DEFAULT_LAGS, n_params: int | None = None) -> dict:
    """Per-series univariate and (for K > 1) joint Ljung-Box p-values.

    The univariate df is reduced by the per-equation parameter count; skips
    lags that would leave df < 1.
    """
    U = np.asarray(residuals, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    K = U.shape[1]
    per_eq = 3 if K == 1 else K + 2
    out: dict = {"series": [], "joint": []}
    for i in range(K):
        rows = []
        for L in lags:
            if L - per_eq >= 1:
                rows.append(ljung_box(U[:, i], L, per_eq).to_dict())
        out["series"].append(rows)
    if K > 1:
        npar = default_n_params(K) if n_params is None else n_params
        for L in lags:
            if K * K * L - npar >= 1:
                out["joint"].append(mv_portmanteau(U, L, npar).to_dict())
    return out
