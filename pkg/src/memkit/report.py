"""Result tables: estimates with z-statistics, fit statistics and GoF grids.

Persistence is reported as beta* = beta + alpha_ii + gamma_ii / 2 rather than
beta itself; its z-statistic uses the delta method through the linear map
theta -> (beta*, alpha, gamma).
"""

from __future__ import annotations

import numpy as np

from .data import DistKind, FitResult, UniParams, VecParams, vec_param_index
from .diagnostics import DEFAULT_LAGS, ljung_box_table
from .dists import GofResult, ad_test, calibrate, cvm_test
from .errors import MemError

__all__ = ["estimates_table", "gof_table", "persistence_matrix", "persistence_transform"]


def persistence_matrix(params: UniParams | VecParams) -> tuple[np.ndarray, list[str]]:
    """Matrix J with J theta = reported coordinates, and the reported names."""
    if isinstance(params, UniParams):
        J = np.array([[1.0, 1.0, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        return J, ["beta1*", "alpha1", "gamma1"]
    K = params.K
    J = np.eye(K * (K + 2))
    names = []
    for i in range(1, K + 1):
        b = vec_param_index(K, "beta", i)
        J[b, vec_param_index(K, "alpha", i, i)] = 1.0
        J[b, vec_param_index(K, "gamma", i)] = 0.5
        names.append(f"beta1*[{i},{i}]")
        names.extend(f"alpha1[{i},{j}]" for j in range(1, K + 1))
        names.append(f"gamma1[{i},{i}]")
    return J, names


def persistence_transform(fit: FitResult) -> tuple[np.ndarray, list[str]]:
    return persistence_matrix(fit.params)


def _zstat(est: float, se: float) -> float | None:
    return float(est / se) if se > 0 else None


def estimates_table(fit: FitResult, lags=DEFAULT_LAGS) -> list[dict]:
    """Rows in display order: persistence, alpha and gamma blocks, then sigma
    and rho, R^2 and Ljung-Box p-values.

    Each row has keys ``block``, ``name``, ``series``, ``est`` and ``zstat``
    (None where no standard error applies).
    """
    J, names = persistence_transform(fit)
    est = J @ fit.theta
    cov = J @ fit.cov @ J.T
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    labels = fit.labels or tuple(f"s{i + 1}" for i in range(1 if not fit.is_vector else fit.params.K))
    rows: list[dict] = []
    blocks = {"beta1*": "persistence", "alpha1": "alpha", "gamma1": "gamma"}
    order = ["beta1*", "alpha1", "gamma1"]
    for key in order:
        for k, n in enumerate(names):
            if n.split("[")[0] != key:
                continue
            if fit.is_vector:
                i = int(n.split("[")[1].split(",")[0]) - 1
                if fit.diagnostics.get("free") is not None and not fit.diagnostics["free"][k]:
                    continue
                series = labels[i]
            else:
                series = labels[0]
            rows.append({"block": blocks[key], "name": n, "series": series, "est": float(est[k]), "zstat": _zstat(est[k], se[k])})
    S = np.atleast_2d(np.asarray(fit.sigma2, dtype=float))
    sd = np.sqrt(np.diag(S))
    for i, lab in enumerate(labels):
        rows.append({"block": "sigma", "name": f"sigma[{i + 1}]", "series": lab, "est": float(sd[i]), "zstat": None})
    for i in range(len(labels)):
        for j in range(i):
            rho = S[i, j] / (sd[i] * sd[j])
            rows.append({"block": "rho", "name": f"rho[{i + 1},{j + 1}]", "series": f"{labels[i]}/{labels[j]}", "est": float(rho), "zstat": None})
    for i, lab in enumerate(labels):
        rows.append({"block": "rsq", "name": "R2", "series": lab, "est": float(fit.rsq[i]), "zstat": None})
    lb = ljung_box_table(fit.residuals, lags)
    for i, lab in enumerate(labels):
        for r in lb["series"][i]:
            rows.append({"block": "ljung_box", "name": f"LB({r['lags']})", "series": lab, "est": r["pvalue"], "zstat": None})
    for r in lb["joint"]:
        rows.append({"block": "ljung_box", "name": f"LB({r['lags']})", "series": "joint", "est": r["pvalue"], "zstat": None})
    return rows


def gof_table(residuals, sigma2, labels=None) -> list[dict]:
    """AD and CvM p-values for each of the four calibrated densities, per series.

    ``sigma2`` is the residual variance per series (the diagonal of the
    residual covariance for vector fits).  Densities whose variance cannot
    be matched are reported with a None p-value and the reason.
    """
    E = np.asarray(residuals, dtype=float)
    if E.ndim == 1:
        E = E[:, None]
    s2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    if s2.ndim == 2:
        s2 = np.diag(s2)
    labels = labels or [f"s{i + 1}" for i in range(E.shape[1])]
    rows = []
    for i, lab in enumerate(labels):
        for kind in DistKind:
            try:
                spec = calibrate(kind, float(s2[i]))
            except MemError as exc:
                for test in ("AD", "CvM"):
                    rows.append({"series": lab, "dist": kind.value, "test": test, "statistic": None, "pvalue": None, "n_used": 0, "n_excluded": 0, "note": str(exc)})
                continue
            for fn in (ad_test, cvm_test):
                g: GofResult = fn(E[:, i], spec)
                rows.append(
                    {
                        "series": lab,
                        "dist": kind.value,
                        "test": g.test,
                        "statistic": g.statistic,
                        "pvalue": g.pvalue,
                        "n_used": g.n_used,
                        "n_excluded": g.n_excluded,
                        "note": g.caveat,
                    }
                )
    return rows
