"""Data-generating processes for the univariate and vector models.

Simulation runs the estimation decomposition forwards: draw unit-mean errors,
draw the negative-return indicator, propagate xi through the same recursion
the estimators use (xi_1 = 1) and set x_t = mu * tau_t * xi_t * eps_t.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .data import AlignedPanel, DistSpec, ObservationSeries, UniParams, VecParams
from .dists import quantile, sample
from .errors import InvalidSpec

__all__ = [
    "Constant",
    "DgpSpec",
    "PiecewiseLinear",
    "SimResult",
    "Sinusoid",
    "replication_seeds",
    "simulate",
    "tau_path",
]

RETURN_SCALE = 100.0 * np.sqrt(252.0 * np.pi / 2.0)


@dataclass(frozen=True)
class Constant:
    pass


@dataclass(frozen=True)
class Sinusoid:
    """1 + amplitude * cos(2 pi periods (t - 1) / T + phase)."""

    amplitude: float = 0.3
    periods: float = 1.0
    phase: float = 0.0


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through (z, level) knots on z in [0, 1]."""

    knots: tuple[tuple[float, float], ...] = ((0.0, 1.0), (1.0, 1.0))


TauProfile = Constant | Sinusoid | PiecewiseLinear


def tau_path(profile: TauProfile, T: int) -> np.ndarray:
    """Slow component with sample mean exactly 1."""
    if isinstance(profile, Constant):
        return np.ones(T)
    z = np.arange(T) / T
    if isinstance(profile, Sinusoid):
        if not 0 <= profile.amplitude < 1:
            raise InvalidSpec("sinusoid amplitude must be in [0, 1)")
        tau = 1.0 + profile.amplitude * np.cos(2 * np.pi * profile.periods * z + profile.phase)
    elif isinstance(profile, PiecewiseLinear):
        kz, kv = zip(*profile.knots)
        if min(kv) <= 0:
            raise InvalidSpec("tau knots must be positive")
        tau = np.interp(z, kz, kv)
    else:
        raise InvalidSpec(f"unknown tau profile {profile!r}")
    return tau / tau.mean()


@dataclass(frozen=True, eq=False)
class DgpSpec:
    """Everything needed to generate one sample.

    ``error`` is one DistSpec (shared by all series) or one per series;
    ``dependence`` is the correlation matrix of the Gaussian copula used to
    couple the vector errors.
    """

    params: UniParams | VecParams
    mu: float | Sequence[float] = 1.0
    tau_profile: TauProfile = field(default_factory=Constant)
    error: DistSpec | Sequence[DistSpec] | None = None
    dependence: np.ndarray | None = None
    neg_prob: float = 0.5
    seed: int | None = None
    labels: tuple[str, ...] | None = None

    @property
    def K(self) -> int:
        return self.params.K if isinstance(self.params, VecParams) else 1

    def validate(self) -> None:
        K = self.K
        if not 0 <= self.neg_prob <= 1:
            raise InvalidSpec("neg_prob must be in [0, 1]")
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.shape not in ((1,), (K,)) or np.any(mu <= 0):
            raise InvalidSpec("mu must be positive, one per series")
        if self.error is None:
            raise InvalidSpec("an error distribution is required")
        errs = self.errors()
        if len(errs) != K:
            raise InvalidSpec("one error distribution per series required")
        if self.dependence is not None:
            R = np.asarray(self.dependence, dtype=float)
            if R.shape != (K, K) or not np.allclose(np.diag(R), 1.0) or not np.allclose(R, R.T):
                raise InvalidSpec("dependence must be a symmetric correlation matrix")
            if np.linalg.eigvalsh(R)[0] < -1e-12:
                raise InvalidSpec("dependence matrix is not positive semidefinite")

    def errors(self) -> list[DistSpec]:
        if isinstance(self.error, DistSpec):
            return [self.error] * self.K
        return list(self.error)


@dataclass(frozen=True, eq=False)
class SimResult:
    """Simulated data plus the true components used to build it."""

    data: ObservationSeries | AlignedPanel
    tau: np.ndarray
    xi: np.ndarray
    eps: np.ndarray
    neg: np.ndarray
    mu: float | np.ndarray


def _draw_errors(spec: DgpSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    errs = spec.errors()
    if spec.K == 1:
        return sample(errs[0], T, rng)
    R = np.eye(spec.K) if spec.dependence is None else np.asarray(spec.dependence, dtype=float)
    # eigh tolerates singular (PSD) correlation matrices where cholesky would not
    w, V = np.linalg.eigh(R)
    L = V * np.sqrt(np.clip(w, 0.0, None))
    Z = rng.standard_normal((T, spec.K)) @ L.T
    U = special.ndtr(Z)
    return np.column_stack([quantile(e, U[:, i]) for i, e in enumerate(errs)])


def _propagate_uni(p: UniParams, eps: np.ndarray, d: np.ndarray) -> np.ndarray:
    T = eps.shape[0]
    xi = np.empty(T)
    xi[0] = 1.0
    omega = p.intercept
    coef = p.beta1 + (p.alpha1 + p.gamma1 * d) * eps
    for t in range(1, T):
        xi[t] = omega + coef[t - 1] * xi[t - 1]
    return xi


def _propagate_vec(p: VecParams, eps: np.ndarray, d: np.ndarray) -> np.ndarray:
    T, K = eps.shape
    Xi = np.empty((T, K))
    Xi[0] = 1.0
    b = np.diag(p.beta1)
    g = np.diag(p.gamma1)
    A = p.alpha1
    omega = 1.0 - p.beta1_star @ np.ones(K)
    for t in range(1, T):
        xe = Xi[t - 1] * eps[t - 1]
        Xi[t] = omega + b * Xi[t - 1] + A @ xe + g * xe * d[t - 1]
    return Xi


def simulate(spec: DgpSpec, T: int, start_date: str = "2000-01-03") -> SimResult:
    if T < 100:
        raise InvalidSpec("T must be at least 100")
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    eps = _draw_errors(spec, T, rng)
    d = (rng.random(T) < spec.neg_prob).astype(float)
    tau = tau_path(spec.tau_profile, T)
    dates = np.busday_offset(np.datetime64(start_date, "D"), np.arange(T), roll="forward")
    sign = np.where(d > 0, -1.0, 1.0)
    if spec.K == 1:
        xi = _propagate_uni(spec.params, eps, d)
        mu = float(np.atleast_1d(spec.mu)[0])
        x = mu * tau * xi * eps
        if np.any(xi <= 0):
            raise InvalidSpec("parameters produced a non-positive xi path")
        returns = sign * np.maximum(x, 1e-12) / RETURN_SCALE
        label = spec.labels[0] if spec.labels else "sim"
        data = ObservationSeries(dates, x, returns, label)
        return SimResult(data, tau, xi, eps, d, mu)
    Xi = _propagate_vec(spec.params, eps, d)
    if np.any(Xi <= 0):
        raise InvalidSpec("parameters produced a non-positive xi path")
    mu = np.broadcast_to(np.asarray(spec.mu, dtype=float), (spec.K,)).copy()
    X = tau[:, None] * mu[None, :] * Xi * eps
    returns = sign * np.maximum(X[:, 0], 1e-12) / RETURN_SCALE
    labels = spec.labels or tuple(f"sim{i + 1}" for i in range(spec.K))
    data = AlignedPanel(dates, X, returns, labels)
    return SimResult(data, tau, Xi, eps, d, mu)


def replication_seeds(base_seed: int, n: int) -> list[int]:
    """Independent per-replication seeds: SeedSequence(base_seed).spawn(n), first word each."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(base_seed).spawn(n)]


def n_workers() -> int:
    """Worker cap from MEMKIT_THREADS (default: all cores)."""
    env = os.environ.get("MEMKIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
