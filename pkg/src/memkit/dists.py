"""Unit-mean error densities calibrated from a variance, and goodness-of-fit tests.

Calibration maps sigma^2 to the parameters that give mean 1 and variance
sigma^2:

* Gamma: shape = rate = 1 / sigma^2
* Log-normal: V = ln(sigma^2 + 1), m = -V / 2
* Beta prime: beta = 2 + 2 / sigma^2, alpha = beta - 1
* Log-logistic: shape beta solves tan(pi/beta) / (pi/beta) - 1 = sigma^2,
  scale alpha = sin(pi/beta) / (pi/beta)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .data import DistKind, DistSpec
from .errors import TooFewObservations, UnattainableVariance

__all__ = [
    "GofResult",
    "ad_pvalue",
    "ad_statistic",
    "ad_test",
    "calibrate",
    "cdf",
    "cvm_statistic",
    "cvm_test",
    "loglogistic_variance",
    "pdf",
    "quantile",
    "sample",
]

LOGLOGISTIC_BRACKET = (2.0 + 1e-6, 200.0)
MIN_GOF_OBS = 20


def loglogistic_variance(shape: float) -> float:
    """Variance of the unit-mean log-logistic with the given shape (> 2)."""
    b = math.pi / shape
    return math.tan(b) / b - 1.0


def _loglogistic_shape(sigma2: float) -> float:
    lo, hi = LOGLOGISTIC_BRACKET
    v_lo, v_hi = loglogistic_variance(lo), loglogistic_variance(hi)
    if not v_hi <= sigma2 <= v_lo:
        raise UnattainableVariance(
            f"log-logistic variance {sigma2} outside attainable range [{v_hi:.3g}, {v_lo:.3g}]"
        )
    # variance is strictly decreasing in the shape; bisect down to adjacent floats
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if loglogistic_variance(mid) > sigma2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate(kind: DistKind | str, sigma2: float) -> DistSpec:
    kind = DistKind(kind)
    sigma2 = float(sigma2)
    if not sigma2 > 0 or not math.isfinite(sigma2):
        raise ValueError("sigma2 must be positive and finite")
    if kind is DistKind.GAMMA:
        a = 1.0 / sigma2
        return DistSpec(kind, (a, a), sigma2)
    if kind is DistKind.LOGNORMAL:
        V = math.log1p(sigma2)
        return DistSpec(kind, (-0.5 * V, V), sigma2)
    if kind is DistKind.BETAPRIME:
        b = 2.0 + 2.0 / sigma2
        return DistSpec(kind, (b - 1.0, b), sigma2)
    shape = _loglogistic_shape(sigma2)
    u = math.pi / shape
    return DistSpec(kind, (math.sin(u) / u, shape), sigma2)


def pdf(spec: DistSpec, x) -> np.ndarray | float:
    """Density at x >= 0; the value at 0 is the right limit (0 or +inf for shapes below 1)."""
    x = np.asarray(x, dtype=float)
    p, q = spec.params
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    if spec.kind is DistKind.GAMMA:
        out[pos] = np.exp(p * np.log(q) - special.gammaln(p) + (p - 1) * np.log(xp) - q * xp)
        at0 = q if p == 1 else (np.inf if p < 1 else 0.0)
    elif spec.kind is DistKind.LOGNORMAL:
        m, V = p, q
        lx = np.log(xp)
        out[pos] = np.exp(-0.5 * (lx - m) ** 2 / V) / (xp * np.sqrt(2 * np.pi * V))
        at0 = 0.0
    elif spec.kind is DistKind.BETAPRIME:
        a, b = p, q
        out[pos] = np.exp((a - 1) * np.log(xp) - (a + b) * np.log1p(xp) - special.betaln(a, b))
        at0 = (1.0 / special.beta(a, b)) if a == 1 else (np.inf if a < 1 else 0.0)
    else:
        scale, shape = p, q
        r = xp / scale
        out[pos] = (shape / scale) * r ** (shape - 1) / (1 + r**shape) ** 2
        at0 = (1.0 / scale) if shape == 1 else (np.inf if shape < 1 else 0.0)
    out[x == 0] = at0
    out[x < 0] = 0.0
    return out if out.ndim else float(out)


def cdf(spec: DistSpec, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    xc = np.maximum(x, 0.0)
    p, q = spec.params
    if spec.kind is DistKind.GAMMA:
        out = special.gammainc(p, q * xc)
    elif spec.kind is DistKind.LOGNORMAL:
        with np.errstate(divide="ignore"):
            out = special.ndtr((np.log(xc) - p) / np.sqrt(q))
    elif spec.kind is DistKind.BETAPRIME:
        with np.errstate(invalid="ignore"):
            y = np.where(np.isinf(xc), 1.0, xc / (1.0 + xc))
        out = special.betainc(p, q, y)
    else:
        with np.errstate(divide="ignore"):
            out = 1.0 / (1.0 + (xc / p) ** (-q))
    out = np.where(x <= 0, 0.0, out)
    return out if np.ndim(out) else float(out)


def quantile(spec: DistSpec, u) -> np.ndarray | float:
    u = np.asarray(u, dtype=float)
    p, q = spec.params
    if spec.kind is DistKind.GAMMA:
        out = special.gammaincinv(p, u) / q
    elif spec.kind is DistKind.LOGNORMAL:
        out = np.exp(p + np.sqrt(q) * special.ndtri(u))
    elif spec.kind is DistKind.BETAPRIME:
        y = special.betaincinv(p, q, u)
        with np.errstate(divide="ignore"):
            out = y / (1.0 - y)
    else:
        with np.errstate(divide="ignore"):
            out = p * (u / (1.0 - u)) ** (1.0 / q)
    return out if np.ndim(out) else float(out)


def sample(spec: DistSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Draws from ``spec``.

    Gamma uses numpy's rejection sampler, the log-normal exponentiates normal
    draws, beta prime and log-logistic invert the cdf of a uniform draw.
    """
    p, q = spec.params
    if spec.kind is DistKind.GAMMA:
        return rng.gamma(p, 1.0 / q, size)
    if spec.kind is DistKind.LOGNORMAL:
        return np.exp(p + np.sqrt(q) * rng.standard_normal(size))
    return quantile(spec, rng.random(size))


# --------------------------------------------------------------------------
# goodness of fit


@dataclass(frozen=True)
class GofResult:
    test: str
    statistic: float
    pvalue: float
    dist: DistSpec
    n_used: int
    n_excluded: int = 0
    caveat: str = "simple-hypothesis asymptotics; sigma2 treated as known"

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "pvalue": self.pvalue,
            "dist": self.dist.to_dict(),
            "n_used": self.n_used,
            "n_excluded": self.n_excluded,
            "caveat": self.caveat,
        }


def _pit(residuals, spec: DistSpec) -> tuple[np.ndarray, int]:
    r = np.asarray(residuals, dtype=float).ravel()
    r = r[np.isfinite(r)]
    keep = r > 0
    n_excl = int(np.sum(~keep))
    r = np.sort(r[keep])
    if r.size < MIN_GOF_OBS:
        raise TooFewObservations(f"{r.size} positive residuals, need {MIN_GOF_OBS}")
    u = np.asarray(cdf(spec, r), dtype=float)
    tiny = np.finfo(float).tiny
    return np.clip(u, tiny, 1.0 - np.finfo(float).epsneg), n_excl


def ad_statistic(u_sorted: np.ndarray) -> float:
    u = np.asarray(u_sorted, dtype=float)
    n = u.size
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))) / n)


def cvm_statistic(u_sorted: np.ndarray) -> float:
    u = np.asarray(u_sorted, dtype=float)
    n = u.size
    i = np.arange(1, n + 1)
    return float(np.sum((u - (2 * i - 1) / (2 * n)) ** 2) + 1.0 / (12 * n))


def _ad_inf_cdf(z: float) -> float:
    # Marsaglia & Marsaglia (2004) approximation of the limiting distribution
    if z <= 0:
        return 0.0
    if z < 2:
        return (
            math.exp(-1.2337141 / z)
            / math.sqrt(z)
            * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
        )
    return math.exp(
        -math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
    )


def _ad_errfix(n: int, x: float) -> float:
    if x > 0.8:
        return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n
    c = 0.01265 + 0.1757 / n
    if x < c:
        t = x / c
        t = math.sqrt(t) * (1 - t) * (49 * t - 102)
        return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n
    t = (x - c) / (0.8 - c)
    t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t
    return t * (0.04213 / n + 0.01365 / (n * n)) / n


def ad_pvalue(statistic: float, n: int) -> float:
    """Upper-tail probability of the Anderson-Darling statistic for sample size n."""
    x = _ad_inf_cdf(statistic)
    if x >= 1.0:
        # the correction polynomial leaves a 1e-5 residue at x = 1
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - (x + _ad_errfix(n, x)))))


def ad_test(residuals, spec: DistSpec) -> GofResult:
    """Anderson-Darling test of ``residuals`` against the fully specified ``spec``.

    Zero residuals are dropped (the statistic needs ln F(x) finite) and
    counted in ``n_excluded``.
    """
    u, n_excl = _pit(residuals, spec)
    A2 = ad_statistic(u)
    return GofResult("AD", A2, ad_pvalue(A2, u.size), spec, u.size, n_excl)


def cvm_test(residuals, spec: DistSpec) -> GofResult:
    """Cramer-von Mises test against the fully specified ``spec``."""
    u, n_excl = _pit(residuals, spec)
    W2 = cvm_statistic(u)
    # scipy evaluates the finite-n null distribution of W^2 for uniform data
    pvalue = float(stats.cramervonmises(u, "uniform").pvalue)
    return GofResult("CvM", W2, min(1.0, max(0.0, pvalue)), spec, u.size, n_excl)
