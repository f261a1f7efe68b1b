"""Vector short-run filter, iterated efficient GMM, Wald tests and forecasts.

Parameters are stacked equation by equation: block i holds
``beta[i,i], alpha[i,1..K], gamma[i,i]`` (see :func:`memkit.data.vec_param_names`).
Because beta and gamma are diagonal, xi_{t,i} depends only on block i, so the
Jacobian d xi_t / d theta' is block diagonal and each block is a first-order
linear filter with pole beta[i,i].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.signal import lfilter

from .data import STATIONARITY_MARGIN, FitResult, VecParams, unpack_vec, vec_param_index
from .diagnostics import r_squared
from .errors import (
    NoConvergence,
    NonPositiveXi,
    SingularSigma,
    SingularSubmatrix,
    TooFewObservations,
)

__all__ = [
    "VXiState",
    "VecOptions",
    "WaldResult",
    "default_start",
    "heavy_restriction_indices",
    "vforecast",
    "vforecast_path",
    "vgmm_criterion",
    "vgmm_fit",
    "vxi_filter",
    "vxi_gradient",
    "wald_test",
]

MIN_FIT_OBS = 200


@dataclass(frozen=True, eq=False)
class VXiState:
    Xi: np.ndarray
    V: np.ndarray
    V_minus: np.ndarray


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    df: int
    pvalue: float

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "df": self.df, "pvalue": self.pvalue}


@dataclass(frozen=True)
class VecOptions:
    """Settings of the iterated two-step GMM.

    ``tol`` bounds the parameter change between successive weight updates;
    ``diagonal_alpha`` fixes off-diagonal alpha at zero and ``diagonal_sigma``
    keeps the weighting matrix diagonal.
    """

    tol: float = 1e-7
    max_iter: int = 500
    max_rounds: int = 100
    start: tuple[float, ...] | None = None
    diagonal_alpha: bool = False
    diagonal_sigma: bool = False


def default_start(K: int) -> np.ndarray:
    A = np.diag(np.full(K, 0.15))
    return VecParams(np.diag(np.full(K, 0.70)), A, np.diag(np.full(K, 0.05))).to_vector()


def _as_inputs(X_xi, neg) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X_xi, dtype=float)
    d = np.asarray(neg, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or d.shape != (X.shape[0],):
        raise ValueError("X_xi must be T x K and neg_indicator of length T")
    if np.any(X < 0) or not np.all(np.isfinite(X)):
        raise ValueError("X_xi must be finite and non-negative")
    if np.any((d != 0) & (d != 1)):
        raise ValueError("neg_indicator must be 0/1")
    return X, d


def _theta(params, K: int) -> np.ndarray:
    if isinstance(params, VecParams):
        return params.to_vector()
    theta = np.asarray(params, dtype=float)
    if theta.shape != (K * (K + 2),):
        raise ValueError("parameter vector has the wrong length")
    return theta


def _filter(theta: np.ndarray, X: np.ndarray, d: np.ndarray) -> np.ndarray:
    T, K = X.shape
    b, A, g = unpack_vec(theta, K)
    omega = 1.0 - b - A.sum(axis=1) - 0.5 * g
    U = np.empty((T, K))
    U[0] = 1.0
    U[1:] = omega + X[:-1] @ A.T + (X[:-1] * d[:-1, None]) * g
    Xi = np.empty((T, K))
    for i in range(K):
        Xi[:, i] = lfilter([1.0], [1.0, -b[i]], U[:, i])
    return Xi


def _jacobian_blocks(theta: np.ndarray, X: np.ndarray, d: np.ndarray, Xi: np.ndarray) -> list[np.ndarray]:
    """Per equation i, the T x (K + 2) matrix d xi_{t,i} / d theta_i'."""
    T, K = X.shape
    b = theta.reshape(K, K + 2)[:, 0]
    blocks = []
    for i in range(K):
        z = np.zeros((T, K + 2))
        z[1:, 0] = Xi[:-1, i] - 1.0
        z[1:, 1 : K + 1] = X[:-1] - 1.0
        z[1:, K + 1] = X[:-1, i] * d[:-1] - 0.5
        blocks.append(lfilter([1.0], [1.0, -b[i]], z, axis=0))
    return blocks


def _check_positive(Xi: np.ndarray) -> None:
    bad = ~(Xi > 0)
    if np.any(bad):
        row, col = np.argwhere(bad)[0]
        raise NonPositiveXi(int(row), int(col))


def vxi_filter(params: VecParams, X_xi, neg_indicator) -> VXiState:
    X, d = _as_inputs(X_xi, neg_indicator)
    Xi = _filter(_theta(params, X.shape[1]), X, d)
    _check_positive(Xi)
    return VXiState(Xi=Xi, V=X - Xi, V_minus=X * d[:, None] - 0.5 * Xi)


def vxi_gradient(params: VecParams, X_xi, neg_indicator) -> np.ndarray:
    """Full T x K x p Jacobian d xi_{t,i} / d theta_k (zero outside block i)."""
    X, d = _as_inputs(X_xi, neg_indicator)
    T, K = X.shape
    theta = _theta(params, K)
    Xi = _filter(theta, X, d)
    _check_positive(Xi)
    out = np.zeros((T, K, theta.size))
    for i, blk in enumerate(_jacobian_blocks(theta, X, d, Xi)):
        out[:, i, i * (K + 2) : (i + 1) * (K + 2)] = blk
    return out


def _moments(theta, X, d, Sinv):
    """Criterion sum_t A_t (eps_t - 1) and M = sum_t A_t Sigma A_t'."""
    T, K = X.shape
    Xi = _filter(theta, X, d)
    E = X / Xi
    W = (E - 1.0) @ Sinv  # rows: Sigma^-1 (eps_t - 1), Sinv symmetric
    B = [blk / Xi[:, [i]] for i, blk in enumerate(_jacobian_blocks(theta, X, d, Xi))]
    p = K + 2
    c = np.empty(K * p)
    M = np.empty((K * p, K * p))
    for i in range(K):
        c[i * p : (i + 1) * p] = B[i].T @ W[:, i]
        for j in range(i, K):
            blk = Sinv[i, j] * (B[i].T @ B[j])
            M[i * p : (i + 1) * p, j * p : (j + 1) * p] = blk
            M[j * p : (j + 1) * p, i * p : (i + 1) * p] = blk.T
    return c, M, Xi, E


def vgmm_criterion(params: VecParams, X_xi, neg_indicator, sigma) -> np.ndarray:
    """sum_t A_t (eps_t - 1) with A_t = (d xi_t'/d theta) diag(xi_t)^-1 Sigma^-1."""
    X, d = _as_inputs(X_xi, neg_indicator)
    theta = _theta(params, X.shape[1])
    Xi = _filter(theta, X, d)
    _check_positive(Xi)
    c, _, _, _ = _moments(theta, X, d, np.linalg.inv(np.asarray(sigma, dtype=float)))
    return c


def _admissible(theta: np.ndarray, K: int) -> bool:
    if not np.all(np.isfinite(theta)):
        return False
    b, A, g = unpack_vec(theta, K)
    bstar = np.diag(b) + A + 0.5 * np.diag(g)
    return float(np.max(np.abs(np.linalg.eigvals(bstar)))) < 1.0 - STATIONARITY_MARGIN


def _solve_criterion(theta, X, d, Sinv, free, max_iter):
    """Damped Gauss-Newton on the estimating equation with a fixed weight."""
    K = X.shape[1]
    c, M, Xi, _ = _moments(theta, X, d, Sinv)
    for it in range(1, max_iter + 1):
        cf = c[free]
        Mf = M[np.ix_(free, free)]
        step = np.linalg.solve(Mf, cf)
        merit = float(cf @ step)
        if np.max(np.abs(cf)) < 1e-9 or np.max(np.abs(step)) < 1e-13:
            return theta, c, it
        t = 1.0
        for _ in range(60):
            cand = theta.copy()
            cand[free] += t * step
            if _admissible(cand, K):
                Xi_c = _filter(cand, X, d)
                if np.all(Xi_c > 0):
                    c_new, M_new, _, _ = _moments(cand, X, d, Sinv)
                    cn = c_new[free]
                    if float(cn @ np.linalg.solve(Mf, cn)) < merit or t < 1e-12:
                        break
            t *= 0.5
        else:
            return theta, c, it
        if t < 1e-12:
            return theta, c, it
        theta, c, M = cand, c_new, M_new
    raise NoConvergence(max_iter, float(np.max(np.abs(c[free]))))


def vgmm_fit(X_xi, neg_indicator, options: VecOptions | None = None) -> FitResult:
    """Iterated two-step efficient GMM for the vector model.

    Step (i) solves the estimating equation for fixed Sigma (identity at
    first); step (ii) replaces Sigma by the moment estimator
    T^-1 sum (eps_t - 1)(eps_t - 1)'.  Rounds repeat until the parameter
    change falls below ``options.tol``.
    """
    options = options or VecOptions()
    X, d = _as_inputs(X_xi, neg_indicator)
    T, K = X.shape
    if T < MIN_FIT_OBS:
        raise TooFewObservations(f"need at least {MIN_FIT_OBS} observations, got {T}")
    if K < 2:
        raise ValueError("vector fit needs K >= 2 series")
    p = K * (K + 2)
    free = np.ones(p, dtype=bool)
    if options.diagonal_alpha:
        for i in range(1, K + 1):
            for j in range(1, K + 1):
                if i != j:
                    free[vec_param_index(K, "alpha", i, j)] = False
    theta = np.array(options.start, dtype=float) if options.start is not None else default_start(K)
    theta[~free] = 0.0
    if not _admissible(theta, K) or not np.all(_filter(theta, X, d) > 0):
        theta = default_start(K)

    Sigma = np.eye(K)
    total = 0
    converged = False
    rounds = 0
    for rounds in range(1, options.max_rounds + 1):
        Sinv = np.linalg.inv(Sigma)
        new_theta, _, its = _solve_criterion(theta, X, d, Sinv, free, options.max_iter)
        total += its
        change = float(np.max(np.abs(new_theta - theta)))
        theta = new_theta
        Xi = _filter(theta, X, d)
        R = X / Xi - 1.0
        Sigma = R.T @ R / T
        if options.diagonal_sigma:
            Sigma = np.diag(np.diag(Sigma))
        _check_sigma(Sigma)
        if change < options.tol:
            converged = True
            break
    if not converged:
        raise NoConvergence(options.max_rounds, change)

    params = VecParams.from_vector(theta, K)
    Sinv = np.linalg.inv(Sigma)
    _, M, Xi, E = _moments(theta, X, d, Sinv)
    Mf = M[np.ix_(free, free)] / T
    try:
        avar_f = np.linalg.inv(Mf)
    except np.linalg.LinAlgError as exc:
        raise SingularSubmatrix("GMM information matrix is singular") from exc
    avar = np.zeros((p, p))
    avar[np.ix_(free, free)] = 0.5 * (avar_f + avar_f.T)
    Sigma_mom = (E - 1.0).T @ (E - 1.0) / T
    rsq = np.array([r_squared(X[:, i], Xi[:, i]) for i in range(K)])
    return FitResult(
        kind="vmem",
        params=params,
        mu=np.ones(K),
        tau=np.ones(T),
        xi=Xi,
        residuals=E,
        sigma2=Sigma_mom,
        avar=avar,
        rsq=rsq,
        converged=True,
        iterations=total,
        x=X,
        neg=d,
        diagnostics={"weight_sigma": Sigma.tolist(), "free": free.tolist(), "gmm_rounds": rounds},
    )


def _check_sigma(Sigma: np.ndarray) -> None:
    ev = np.linalg.eigvalsh(Sigma)
    if not np.all(np.isfinite(ev)) or ev[0] <= 0 or ev[-1] / ev[0] > 1e12:
        raise SingularSigma("residual covariance is singular")


def heavy_restriction_indices(K: int = 3) -> list[int]:
    """alpha[1,1], gamma[1,1], alpha[2,1], alpha[3,1]: lagged series 1 irrelevant everywhere."""
    idx = [vec_param_index(K, "alpha", 1, 1), vec_param_index(K, "gamma", 1)]
    idx += [vec_param_index(K, "alpha", i, 1) for i in range(2, K + 1)]
    return idx


def wald_test(fit: FitResult, restricted_indices, df: int | None = None) -> WaldResult:
    """Wald test of theta_R = 0 using the estimated covariance of theta_hat."""
    idx = np.asarray(restricted_indices, dtype=int)
    theta = fit.theta
    if idx.size == 0 or np.any(idx < 0) or np.any(idx >= theta.size):
        raise IndexError("restricted indices out of range")
    df = int(idx.size if df is None else df)
    if df < 1:
        raise ValueError("df must be positive")
    V = fit.cov[np.ix_(idx, idx)]
    try:
        if np.linalg.cond(V) > 1e14:
            raise np.linalg.LinAlgError
        W = float(theta[idx] @ np.linalg.solve(V, theta[idx]))
    except np.linalg.LinAlgError as exc:
        raise SingularSubmatrix("covariance submatrix is singular") from exc
    return wald_pvalue(W, df)


def wald_pvalue(statistic: float, df: int) -> WaldResult:
    return WaldResult(float(statistic), int(df), float(stats.chi2.sf(statistic, df)))


def vforecast_path(params: VecParams, xi_t, x_t, neg_t: float, H: int) -> np.ndarray:
    """H x K forecasts xi_{t+h|t}, h = 1..H."""
    if H < 1:
        raise ValueError("horizon must be >= 1")
    xi_t = np.asarray(xi_t, dtype=float)
    x_t = np.asarray(x_t, dtype=float)
    K = params.K
    one = np.ones(K)
    Bs = params.beta1_star
    out = np.empty((H, K))
    out[0] = (one - Bs @ one) + params.beta1 @ xi_t + params.alpha1 @ x_t + params.gamma1 @ (x_t * neg_t)
    for h in range(1, H):
        out[h] = (one - Bs @ one) + Bs @ out[h - 1]
    return out


def vforecast(params: VecParams, state: VXiState | np.ndarray, x_t, neg_t: float, h: int) -> np.ndarray:
    xi_t = state.Xi[-1] if isinstance(state, VXiState) else state
    return vforecast_path(params, xi_t, x_t, neg_t, h)[-1]
