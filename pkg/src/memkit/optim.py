"""Small BFGS minimiser with step halving on inadmissible points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["QNResult", "bfgs_minimize"]

# fun(x) -> (f, g) or None when x is inadmissible
Objective = Callable[[np.ndarray], "tuple[float, np.ndarray] | None"]


@dataclass
class QNResult:
    x: np.ndarray
    f: float
    grad: np.ndarray
    iterations: int
    converged: bool
    message: str


def bfgs_minimize(
    fun: Objective,
    x0: np.ndarray,
    inv_hess: Callable[[np.ndarray], np.ndarray] | None = None,
    gtol: float = 1e-7,
    max_iter: int = 500,
    max_halvings: int = 50,
    c1: float = 1e-4,
) -> QNResult:
    """Minimise ``fun`` by BFGS with backtracking (Armijo) line search.

    ``inv_hess(x)`` supplies the starting inverse-Hessian approximation and is
    used again to reset the curvature model when a line search stalls.
    Convergence is declared when the gradient max-norm drops below ``gtol``.
    """
    x = np.asarray(x0, dtype=float).copy()
    out = fun(x)
    if out is None:
        raise ValueError("starting point is inadmissible")
    f, g = out
    n = x.size
    H = inv_hess(x) if inv_hess is not None else np.eye(n)
    fresh = True
    it = 0
    while it < max_iter:
        gnorm = float(np.max(np.abs(g)))
        if gnorm < gtol:
            return QNResult(x, f, g, it, True, "gradient tolerance reached")
        it += 1
        p = -H @ g
        slope = float(g @ p)
        if slope >= 0:
            # lost descent direction: fall back to the curvature model at x
            H = inv_hess(x) if inv_hess is not None else np.eye(n)
            fresh = True
            p = -H @ g
            slope = float(g @ p)
        t = 1.0
        accepted = None
        for _ in range(max_halvings):
            xn = x + t * p
            res = fun(xn)
            if res is not None:
                fn, gn = res
                if fn <= f + c1 * t * slope:
                    accepted = (xn, fn, gn)
                    break
                # objective flat to rounding: accept if the gradient still shrinks
                if abs(fn - f) <= 1e-14 * max(1.0, abs(f)) and np.max(np.abs(gn)) < gnorm:
                    accepted = (xn, fn, gn)
                    break
            t *= 0.5
        if accepted is None:
            if fresh:
                return QNResult(x, f, g, it, False, "line search failed")
            H = inv_hess(x) if inv_hess is not None else np.eye(n)
            fresh = True
            continue
        xn, fn, gn = accepted
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            Hy = H @ y
            H = H + ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
            fresh = False
        x, f, g = xn, fn, gn
    gnorm = float(np.max(np.abs(g)))
    return QNResult(x, f, g, it, gnorm < gtol, "iteration limit")
