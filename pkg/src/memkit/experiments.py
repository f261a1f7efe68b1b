"""Monte Carlo recovery experiments shared by the acceptance tests and scripts.

Each replication draws a fresh sample from a DgpSpec with its own seed
(``replication_seeds``), fits it, and records estimates and standard errors
in the reported coordinates (beta*, alpha, gamma).
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .data import UniParams, VecParams
from .dists import calibrate
from .errors import NoOuterConvergence
from .report import persistence_matrix, persistence_transform
from .sim import DgpSpec, Sinusoid, _draw_errors, n_workers, replication_seeds, simulate
from .smoother import SmootherConfig
from .spfit import SpFitOptions, fit_base_mem, fit_base_vmem, fit_spmem, fit_spvmem

__all__ = [
    "RecoverySummary",
    "run_recovery",
    "spmem_dgp",
    "summarize",
    "univariate_dgp",
    "vector_dgp",
]

Z95 = 1.959963984540054


@dataclass(frozen=True, eq=False)
class RecoverySummary:
    names: list[str]
    truth: np.ndarray
    estimates: np.ndarray  # R x p
    stderr: np.ndarray  # R x p
    extra: dict

    @property
    def n(self) -> int:
        return self.estimates.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.estimates.mean(axis=0)

    @property
    def mc_se(self) -> np.ndarray:
        return self.estimates.std(axis=0, ddof=1) / np.sqrt(self.n)

    @property
    def bias_in_se(self) -> np.ndarray:
        """(mean - truth) / MC standard error of the mean."""
        return (self.mean - self.truth) / self.mc_se

    @property
    def coverage(self) -> np.ndarray:
        lo = self.estimates - Z95 * self.stderr
        hi = self.estimates + Z95 * self.stderr
        return np.mean((lo <= self.truth) & (self.truth <= hi), axis=0)

    def rows(self) -> list[dict]:
        return [
            {
                "param": n,
                "truth": float(t),
                "mean": float(m),
                "mc_se": float(s),
                "bias_in_se": float(b),
                "coverage": float(c),
            }
            for n, t, m, s, b, c in zip(self.names, self.truth, self.mean, self.mc_se, self.bias_in_se, self.coverage)
        ]


def univariate_dgp(beta_star=0.88, alpha=0.10, gamma=0.15, sigma2=0.15, mu=15.0, tau_profile=None) -> DgpSpec:
    params = UniParams(beta_star - alpha - gamma / 2, alpha, gamma)
    kw = {} if tau_profile is None else {"tau_profile": tau_profile}
    return DgpSpec(params, mu, error=calibrate("gamma", sigma2), **kw)


def spmem_dgp(amplitude=0.3, **kw) -> DgpSpec:
    return univariate_dgp(tau_profile=Sinusoid(amplitude=amplitude), **kw)


def vector_dgp(K=2, cross=0.05, sigma2=0.15, rho=0.5, mu=15.0) -> DgpSpec:
    """Diagonal beta* = 0.88 per equation, alpha_ii = 0.10, alpha_ij = cross, gamma_ii = 0.15."""
    a = np.full((K, K), cross)
    np.fill_diagonal(a, 0.10)
    g = np.eye(K) * 0.15
    b = np.eye(K) * (0.88 - 0.10 - 0.075)
    R = np.full((K, K), rho)
    np.fill_diagonal(R, 1.0)
    return DgpSpec(VecParams(b, a, g), mu, error=calibrate("gamma", sigma2), dependence=R)


def _true_sigma(spec: DgpSpec, n: int = 2_000_000, seed: int = 12345) -> np.ndarray:
    """Error covariance implied by the copula and marginals, by simulation."""
    E = _draw_errors(spec, n, np.random.default_rng(seed))
    return np.cov(E.T, bias=True)


def _one(args):
    spec, T, model, bandwidth_days, seed = args
    spec = replace(spec, seed=seed)
    sim = simulate(spec, T)
    opts = SpFitOptions(smoother=SmootherConfig(bandwidth_days)) if bandwidth_days else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoOuterConvergence)
        if model == "mem":
            fit = fit_base_mem(sim.data)
        elif model == "spmem":
            fit = fit_spmem(sim.data, opts)
        elif model == "vmem":
            fit = fit_base_vmem(sim.data)
        else:
            fit = fit_spvmem(sim.data, opts)
    J, names = persistence_transform(fit)
    est = J @ fit.theta
    se = np.sqrt(np.diag(J @ fit.cov @ J.T))
    out = {"est": est, "se": se, "names": names, "converged": fit.converged}
    if model in ("spmem", "spvmem"):
        out["tau_maxdev"] = float(np.max(np.abs(fit.tau - sim.tau)))
    if fit.is_vector:
        out["sigma"] = np.asarray(fit.sigma2)
    return out


def run_recovery(
    spec: DgpSpec,
    T: int,
    reps: int,
    model: str,
    base_seed: int = 20240101,
    bandwidth_days: int | None = None,
    workers: int | None = None,
    progress: Callable[[int], None] | None = None,
) -> RecoverySummary:
    seeds = replication_seeds(base_seed, reps)
    jobs = [(spec, T, model, bandwidth_days, s) for s in seeds]
    workers = workers or n_workers()
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_one, jobs, chunksize=max(1, reps // (4 * workers))))
    else:
        results = []
        for k, j in enumerate(jobs):
            results.append(_one(j))
            if progress:
                progress(k + 1)
    return summarize(spec, results)


def summarize(spec: DgpSpec, results: list[dict]) -> RecoverySummary:
    p = spec.params
    theta = p.to_vector() if isinstance(p, VecParams) else p.to_array()
    J, _ = persistence_matrix(p)
    truth = J @ theta
    extra: dict = {"converged": np.array([r["converged"] for r in results])}
    if "tau_maxdev" in results[0]:
        extra["tau_maxdev"] = np.array([r["tau_maxdev"] for r in results])
    if "sigma" in results[0]:
        extra["sigma"] = np.array([r["sigma"] for r in results])
        extra["sigma_true"] = _true_sigma(spec)
    return RecoverySummary(
        results[0]["names"],
        truth,
        np.array([r["est"] for r in results]),
        np.array([r["se"] for r in results]),
        extra,
    )
