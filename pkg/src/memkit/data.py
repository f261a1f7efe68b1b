"""Typed containers shared by the estimation, diagnostics and CLI layers.

All containers are frozen dataclasses holding read-only numpy arrays.  Dates
are ``datetime64[D]`` (integer day ordinals underneath) and serialise to
ISO-8601 strings.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    EmptyIntersection,
    InvalidSpec,
    MismatchedReturns,
    NegativeValue,
    StationarityError,
    TooFewObservations,
)

__all__ = [
    "AlignedPanel",
    "DistKind",
    "DistSpec",
    "FitResult",
    "ObservationSeries",
    "UniParams",
    "VecParams",
    "validate_panel",
]

MIN_PANEL_OBS = 50


def _frozen(a: Any, dtype: Any = float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def as_dates(dates: Any) -> np.ndarray:
    """Coerce ISO strings, ``datetime.date`` or datetime64 input to ``datetime64[D]``."""
    return np.asarray(dates, dtype="datetime64[D]")


def _dates_to_json(dates: np.ndarray | None) -> list[str] | None:
    if dates is None:
        return None
    return [str(d) for d in dates]


def _arr_to_json(a: np.ndarray | None):
    return None if a is None else np.asarray(a).tolist()


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """One non-negative volatility measure for one market.

    ``returns`` carries the signed market return used for the negative-return
    indicator; entries may be NaN when the source has no return information
    (implied-volatility indices, for instance).
    """

    dates: np.ndarray
    values: np.ndarray
    returns: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        dates = as_dates(self.dates)
        dates.flags.writeable = False
        values = _frozen(self.values)
        returns = _frozen(self.returns)
        if values.ndim != 1 or dates.shape != values.shape or returns.shape != values.shape:
            raise MismatchedReturns(
                f"dates/values/returns lengths differ: {dates.shape}, {values.shape}, {returns.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NegativeValue("values must be finite")
        if np.any(values < 0):
            i = int(np.argmax(values < 0))
            raise NegativeValue(f"negative value {values[i]} at {dates[i]}")
        if len(dates) > 1 and np.any(np.diff(dates.astype(np.int64)) <= 0):
            raise ValueError("dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def neg_indicator(self) -> np.ndarray:
        """D_t = 1 when the return is negative, else 0 (NaN returns count as 0)."""
        return (self.returns < 0).astype(float)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "dates": _dates_to_json(self.dates),
            "values": self.values.tolist(),
            "returns": self.returns.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationSeries":
        return cls(d["dates"], d["values"], d["returns"], d.get("label", "custom"))


@dataclass(frozen=True, eq=False)
class AlignedPanel:
    """K co-dated series (columns of ``X``) sharing one return series."""

    dates: np.ndarray
    X: np.ndarray
    returns: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        dates = as_dates(self.dates)
        dates.flags.writeable = False
        X = _frozen(self.X)
        if X.ndim != 2 or X.shape[0] != len(dates):
            raise ValueError("X must be T x K with T == len(dates)")
        if np.any(X < 0) or not np.all(np.isfinite(X)):
            raise NegativeValue("panel entries must be finite and non-negative")
        returns = _frozen(self.returns)
        if returns.shape != (len(dates),):
            raise MismatchedReturns("returns must have one entry per date")
        labels = tuple(self.labels)
        if len(labels) != X.shape[1]:
            raise ValueError("one label per column required")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "labels", labels)

    @property
    def T(self) -> int:
        return self.X.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def neg_indicator(self) -> np.ndarray:
        return (self.returns < 0).astype(float)

    def column(self, i: int) -> ObservationSeries:
        return ObservationSeries(self.dates, self.X[:, i], self.returns, self.labels[i])

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "dates": _dates_to_json(self.dates),
            "X": self.X.tolist(),
            "returns": self.returns.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AlignedPanel":
        return cls(d["dates"], d["X"], d["returns"], tuple(d["labels"]))


def validate_panel(series_list: Sequence[ObservationSeries]) -> AlignedPanel:
    """Align series on their common dates.

    Returns come from the first series.  Raises ``EmptyIntersection`` if fewer
    than 50 dates are shared, ``MismatchedReturns`` if two series carry
    conflicting return signs on a shared date.
    """
    if len(series_list) == 0:
        raise EmptyIntersection("no series given")
    for s in series_list:
        if np.any(np.asarray(s.values) < 0):
            raise NegativeValue(f"series {s.label!r} contains negative values")
        if len(s) < MIN_PANEL_OBS:
            raise TooFewObservations(
                f"series {s.label!r} has {len(s)} observations, need {MIN_PANEL_OBS}"
            )
    common = series_list[0].dates
    for s in series_list[1:]:
        common = np.intersect1d(common, s.dates, assume_unique=True)
    if len(common) < MIN_PANEL_OBS:
        raise EmptyIntersection(f"only {len(common)} common dates")

    cols, rets = [], []
    for s in series_list:
        idx = np.searchsorted(s.dates, common)
        cols.append(s.values[idx])
        rets.append(s.returns[idx])
    returns = rets[0]
    if np.any(np.isnan(returns)):
        raise MismatchedReturns(f"first series {series_list[0].label!r} lacks returns on common dates")
    for s, r in zip(series_list[1:], rets[1:]):
        known = np.isfinite(r)
        if np.any((r[known] < 0) != (returns[known] < 0)):
            raise MismatchedReturns(f"return signs of {s.label!r} disagree with the first series")
    return AlignedPanel(common, np.column_stack(cols), returns, tuple(s.label for s in series_list))


# --------------------------------------------------------------------------
# parameters

STATIONARITY_MARGIN = 1e-6


@dataclass(frozen=True)
class UniParams:
    """Short-run recursion coefficients of the univariate model."""

    beta1: float
    alpha1: float
    gamma1: float

    def __post_init__(self):
        for name in ("beta1", "alpha1", "gamma1"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise StationarityError(f"{name} is not finite")
            object.__setattr__(self, name, v)
        bstar = self.beta1_star
        if not 0.0 <= bstar < 1.0:
            raise StationarityError(f"persistence beta1* = {bstar:.6g} outside [0, 1)")

    @property
    def beta1_star(self) -> float:
        return self.beta1 + self.alpha1 + 0.5 * self.gamma1

    @property
    def intercept(self) -> float:
        return 1.0 - self.beta1_star

    def to_array(self) -> np.ndarray:
        return np.array([self.beta1, self.alpha1, self.gamma1])

    @classmethod
    def from_array(cls, theta: Sequence[float]) -> "UniParams":
        b, a, g = theta
        return cls(b, a, g)

    @staticmethod
    def names() -> list[str]:
        return ["beta1", "alpha1", "gamma1"]

    def to_dict(self) -> dict:
        return {"beta1": self.beta1, "alpha1": self.alpha1, "gamma1": self.gamma1}

    @classmethod
    def from_dict(cls, d: dict) -> "UniParams":
        return cls(d["beta1"], d["alpha1"], d["gamma1"])


def vec_param_names(K: int) -> list[str]:
    """Names of the stacked vector parameter, one block of K + 2 per equation.

    Equation i contributes ``beta[i,i], alpha[i,1..K], gamma[i,i]`` (1-based).
    """
    names = []
    for i in range(1, K + 1):
        names.append(f"beta[{i},{i}]")
        names.extend(f"alpha[{i},{j}]" for j in range(1, K + 1))
        names.append(f"gamma[{i},{i}]")
    return names


def vec_param_index(K: int, kind: str, i: int, j: int | None = None) -> int:
    """Position (0-based) of a coefficient in the stacked vector; i, j are 1-based."""
    block = (i - 1) * (K + 2)
    if kind == "beta":
        return block
    if kind == "alpha":
        if j is None:
            raise ValueError("alpha needs a column index")
        return block + j
    if kind == "gamma":
        return block + K + 1
    raise ValueError(f"unknown coefficient kind {kind!r}")


@dataclass(frozen=True, eq=False)
class VecParams:
    """Short-run coefficients of the vector model: diagonal beta and gamma, full alpha."""

    beta1: np.ndarray
    alpha1: np.ndarray
    gamma1: np.ndarray

    def __post_init__(self):
        b, a, g = (_frozen(m) for m in (self.beta1, self.alpha1, self.gamma1))
        K = a.shape[0]
        for name, m in (("beta1", b), ("alpha1", a), ("gamma1", g)):
            if m.shape != (K, K):
                raise StationarityError(f"{name} must be {K}x{K}")
            if not np.all(np.isfinite(m)):
                raise StationarityError(f"{name} is not finite")
        for name, m in (("beta1", b), ("gamma1", g)):
            if np.any(m[~np.eye(K, dtype=bool)] != 0):
                raise StationarityError(f"{name} must be diagonal")
        object.__setattr__(self, "beta1", b)
        object.__setattr__(self, "alpha1", a)
        object.__setattr__(self, "gamma1", g)
        rho = self.spectral_radius
        if not rho < 1.0:
            raise StationarityError(f"spectral radius of beta1* = {rho:.6g} >= 1")

    @property
    def K(self) -> int:
        return self.alpha1.shape[0]

    @property
    def beta1_star(self) -> np.ndarray:
        return self.beta1 + self.alpha1 + 0.5 * self.gamma1

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.beta1_star))))

    def to_vector(self) -> np.ndarray:
        K = self.K
        out = np.empty(K * (K + 2))
        for i in range(K):
            blk = i * (K + 2)
            out[blk] = self.beta1[i, i]
            out[blk + 1 : blk + 1 + K] = self.alpha1[i]
            out[blk + K + 1] = self.gamma1[i, i]
        return out

    @classmethod
    def from_vector(cls, theta: Sequence[float], K: int) -> "VecParams":
        b, a, g = unpack_vec(np.asarray(theta, dtype=float), K)
        return cls(np.diag(b), a, np.diag(g))

    def names(self) -> list[str]:
        return vec_param_names(self.K)

    def to_dict(self) -> dict:
        return {
            "beta1": self.beta1.tolist(),
            "alpha1": self.alpha1.tolist(),
            "gamma1": self.gamma1.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VecParams":
        return cls(d["beta1"], d["alpha1"], d["gamma1"])


def unpack_vec(theta: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the stacked vector into (diag beta, alpha matrix, diag gamma)."""
    if theta.shape != (K * (K + 2),):
        raise ValueError(f"expected {K * (K + 2)} parameters, got {theta.shape}")
    blocks = theta.reshape(K, K + 2)
    return blocks[:, 0].copy(), blocks[:, 1 : K + 1].copy(), blocks[:, K + 1].copy()


# --------------------------------------------------------------------------
# error distributions


class DistKind(str, enum.Enum):
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"
    BETAPRIME = "betaprime"
    LOGLOGISTIC = "loglogistic"


@dataclass(frozen=True)
class DistSpec:
    """A unit-mean positive density calibrated to variance ``sigma2``.

    ``params`` are (alpha, beta) for gamma, beta-prime and log-logistic, and
    (m, V) for the log-normal.
    """

    kind: DistKind
    params: tuple[float, float]
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "kind", DistKind(self.kind))
        p = tuple(float(v) for v in self.params)
        if len(p) != 2:
            raise InvalidSpec("two distribution parameters expected")
        if self.kind is not DistKind.LOGNORMAL and min(p) <= 0:
            raise InvalidSpec(f"{self.kind.value} parameters must be positive")
        if self.kind is DistKind.LOGNORMAL and p[1] <= 0:
            raise InvalidSpec("log-normal V must be positive")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": list(self.params), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, d: dict) -> "DistSpec":
        return cls(DistKind(d["kind"]), tuple(d["params"]), d["sigma2"])


# --------------------------------------------------------------------------
# fit output


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimates and fitted components of one univariate or vector fit.

    ``avar`` is the asymptotic covariance of sqrt(T)(theta_hat - theta), in the
    natural (beta, alpha, gamma) coordinates; ``cov`` divides it by T.  For
    univariate fits the path arrays are 1-D, for vector fits they are T x K.
    ``x`` holds the series on the scale it was fitted (original units for the
    drivers in :mod:`memkit.spfit`).
    """

    kind: str
    params: UniParams | VecParams
    mu: float | np.ndarray
    tau: np.ndarray
    xi: np.ndarray
    residuals: np.ndarray
    sigma2: float | np.ndarray
    avar: np.ndarray
    rsq: np.ndarray
    converged: bool
    iterations: int
    x: np.ndarray
    neg: np.ndarray
    dates: np.ndarray | None = None
    labels: tuple[str, ...] = ()
    outer_iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tau", "xi", "residuals", "avar", "rsq", "x", "neg"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if isinstance(self.mu, (list, tuple, np.ndarray)) and np.ndim(self.mu) > 0:
            object.__setattr__(self, "mu", _frozen(self.mu))
        else:
            object.__setattr__(self, "mu", float(self.mu))
        if np.ndim(self.sigma2) > 0:
            object.__setattr__(self, "sigma2", _frozen(self.sigma2))
        else:
            object.__setattr__(self, "sigma2", float(self.sigma2))
        if self.dates is not None:
            d = as_dates(self.dates)
            d.flags.writeable = False
            object.__setattr__(self, "dates", d)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "converged", bool(self.converged))
        object.__setattr__(self, "iterations", int(self.iterations))

    @property
    def is_vector(self) -> bool:
        return isinstance(self.params, VecParams)

    @property
    def nobs(self) -> int:
        return self.xi.shape[0]

    @property
    def theta(self) -> np.ndarray:
        if self.is_vector:
            return self.params.to_vector()
        return self.params.to_array()

    @property
    def param_names(self) -> list[str]:
        return self.params.names()

    @property
    def cov(self) -> np.ndarray:
        return self.avar / self.nobs

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def fitted(self) -> np.ndarray:
        """Conditional mean mu * tau_t * xi_t on the scale of ``x``."""
        if self.is_vector:
            return self.tau[:, None] * np.asarray(self.mu)[None, :] * self.xi
        return self.mu * self.tau * self.xi

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": {"type": "vec" if self.is_vector else "uni", **self.params.to_dict()},
            "mu": _arr_to_json(self.mu) if np.ndim(self.mu) else self.mu,
            "tau": self.tau.tolist(),
            "xi": self.xi.tolist(),
            "residuals": self.residuals.tolist(),
            "sigma2": _arr_to_json(self.sigma2) if np.ndim(self.sigma2) else self.sigma2,
            "avar": self.avar.tolist(),
            "rsq": self.rsq.tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
            "x": self.x.tolist(),
            "neg": self.neg.tolist(),
            "dates": _dates_to_json(self.dates),
            "labels": list(self.labels),
            "outer_iterations": self.outer_iterations,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        p = dict(d["params"])
        ptype = p.pop("type")
        params = VecParams.from_dict(p) if ptype == "vec" else UniParams.from_dict(p)
        return cls(
            kind=d["kind"],
            params=params,
            mu=d["mu"],
            tau=d["tau"],
            xi=d["xi"],
            residuals=d["residuals"],
            sigma2=d["sigma2"],
            avar=d["avar"],
            rsq=d["rsq"],
            converged=d["converged"],
            iterations=d["iterations"],
            x=d["x"],
            neg=d["neg"],
            dates=d["dates"],
            labels=tuple(d["labels"]),
            outer_iterations=d["outer_iterations"],
            diagnostics=d["diagnostics"],
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> "FitResult":
        return cls.from_dict(json.loads(s))

    def with_updates(self, **changes) -> "FitResult":
        from dataclasses import replace

        return replace(self, **changes)
