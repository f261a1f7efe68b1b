"""Nadaraya-Watson estimation of the slow-moving component tau_t."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, ZeroVariance

__all__ = [
    "Kernel",
    "SmootherConfig",
    "kernel_weights",
    "months_to_days",
    "nw_smooth",
    "precision_weighted_target",
]

TRADING_DAYS_PER_MONTH = 21


class Kernel(str, enum.Enum):
    GAUSSIAN = "gaussian"
    EPANECHNIKOV = "epanechnikov"


@dataclass(frozen=True)
class SmootherConfig:
    """Bandwidth in trading days and kernel choice."""

    bandwidth_days: int = 126
    kernel: Kernel = Kernel.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "kernel", Kernel(self.kernel))
        if int(self.bandwidth_days) != self.bandwidth_days or self.bandwidth_days < 5:
            raise ValueError("bandwidth_days must be an integer >= 5")
        object.__setattr__(self, "bandwidth_days", int(self.bandwidth_days))

    @classmethod
    def from_months(cls, months: float, kernel: Kernel = Kernel.GAUSSIAN) -> "SmootherConfig":
        return cls(months_to_days(months), kernel)


def months_to_days(months: float) -> int:
    return int(round(months * TRADING_DAYS_PER_MONTH))


def kernel_weights(u: np.ndarray, kernel: Kernel) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if kernel is Kernel.GAUSSIAN:
        return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    if kernel is Kernel.EPANECHNIKOV:
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    raise ValueError(f"unknown kernel {kernel!r}")


def nw_smooth(targets: np.ndarray, config: SmootherConfig, normalize: bool = True) -> np.ndarray:
    """Kernel-weighted average of ``targets`` on the rescaled time axis z_t = t/T.

    With h = bandwidth_days / T the kernel argument (z_t - z_s)/h equals
    (t - s)/bandwidth_days, so the full double sum is evaluated as a direct
    (not FFT) discrete convolution.  The result is rescaled to unit sample
    mean unless ``normalize`` is False.
    """
    y = np.asarray(targets, dtype=float)
    T = y.shape[0]
    if y.ndim != 1:
        raise ValueError("targets must be one-dimensional")
    # bandwidths beyond the sample length are the flat-tau limit and stay allowed
    if T < 2 * config.bandwidth_days and config.bandwidth_days <= T:
        raise ValueError(f"need T >= 2 * bandwidth_days ({2 * config.bandwidth_days}), got {T}")
    if not np.all(np.isfinite(y)) or np.any(y < 0):
        raise ValueError("targets must be finite and non-negative")

    lags = np.arange(-(T - 1), T) / config.bandwidth_days
    k = kernel_weights(lags, config.kernel)
    num = np.convolve(k, y)[T - 1 : 2 * T - 1]
    den = np.convolve(k, np.ones(T))[T - 1 : 2 * T - 1]
    if np.any(den <= 0) or not np.all(np.isfinite(den)):
        raise DegenerateWeights("kernel weights vanish for some rows")
    tau = num / den
    if normalize:
        m = tau.mean()
        if m <= 0:
            raise DegenerateWeights("smoothed series has non-positive mean")
        tau = tau / m
    return tau


def precision_weighted_target(X_scaled: np.ndarray, sigma_diag: np.ndarray) -> np.ndarray:
    """Cross-sectional average of rescaled series weighted by inverse error variances.

    ``X_scaled[t, j]`` is x_{j,t} / (mu_j xi_{j,t}); weights sigma_j^-2 / sum_k sigma_k^-2.
    """
    X_scaled = np.asarray(X_scaled, dtype=float)
    s2 = np.asarray(sigma_diag, dtype=float)
    if X_scaled.ndim == 1:
        X_scaled = X_scaled[:, None]
    if s2.shape != (X_scaled.shape[1],):
        raise ValueError("one variance per column required")
    if np.any(~(s2 > 0)):
        raise ZeroVariance("error variances must be strictly positive")
    w = (1.0 / s2) / np.sum(1.0 / s2)
    return X_scaled @ w
