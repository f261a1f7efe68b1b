"""Command-line front end: fit, gof, forecast and simulate.

Every command renders all of its outputs in memory first and only then
writes them under ``--out``, so a failing run leaves no partial files.
Settings can also come from a JSON file (``--config``) whose keys are the
long option names with dashes replaced by underscores; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .data import AlignedPanel, DistKind, FitResult, UniParams, VecParams, validate_panel
from .diagnostics import DEFAULT_LAGS, acf, ljung_box_table
from .dists import calibrate
from .errors import MemError
from .ingest import TRANSFORMS, CsvLayout, load_series
from .mem import MemOptions
from .report import estimates_table, gof_table
from .sim import Constant, DgpSpec, Sinusoid, simulate
from .smoother import Kernel, SmootherConfig
from .spfit import SpFitOptions, fit_base_mem, fit_base_vmem, fit_spmem, fit_spvmem, forecast_mean
from .vmem import VecOptions

log = logging.getLogger("memkit")

KINDS = ("mem", "spmem", "vmem", "spvmem")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: Path
    kind: str = "spmem"
    inputs: tuple[str, ...] = ()
    value_columns: tuple[str, ...] = ("value",)
    date_column: str = "date"
    returns_column: str | None = None
    date_format: str = "%Y-%m-%d"
    delimiter: str = ","
    transform: str = "level"
    annualization_days: int = 252
    bandwidth_months: float = 6.0
    max_outer_iter: int = 50
    kernel: str = "gaussian"
    lags: tuple[int, ...] = DEFAULT_LAGS
    acf_lags: int = 50
    horizons: int = 22
    seed: int | None = None
    verbose: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise UsageError(f"--kind must be one of {KINDS}")
        if self.kind.startswith("sp") and not self.bandwidth_months > 0:
            raise UsageError("--bandwidth-months must be positive")
        if self.annualization_days < 1:
            raise UsageError("--annualization-days must be >= 1")
        if self.max_outer_iter < 1:
            raise UsageError("--max-outer-iter must be >= 1")
        if self.horizons < 1:
            raise UsageError("--horizons must be >= 1")
        if any(L < 1 for L in self.lags):
            raise UsageError("--lags must be positive integers")
        if self.transform not in TRANSFORMS:
            raise UsageError(f"--transform must be one of {TRANSFORMS}")


# --------------------------------------------------------------------------
# rendering helpers


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None or (isinstance(v, float) and math.isnan(v)) else v for v in r])
    return buf.getvalue()


def _dict_rows_csv(rows: list[dict]) -> str:
    header = list(rows[0]) if rows else []
    return _csv_text(header, [[r[k] for k in header] for r in rows])


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _commit(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    log.info("wrote %s", ", ".join(sorted(files)))


# --------------------------------------------------------------------------
# commands


def _load_inputs(cfg: RunConfig):
    if not cfg.inputs:
        raise UsageError("--input is required")
    for p in cfg.inputs:
        if not Path(p).is_file():
            raise FileNotFoundError(f"input not found: {p}")
    ins, cols = list(cfg.inputs), list(cfg.value_columns)
    if len(ins) == 1 and len(cols) > 1:
        ins = ins * len(cols)
    elif len(cols) == 1 and len(ins) > 1:
        cols = cols * len(ins)
    if len(ins) != len(cols):
        raise UsageError("give one value column per input, or several columns of one input")
    series = []
    for path, col in zip(ins, cols):
        layout = CsvLayout(path, cfg.date_column, col, cfg.returns_column, cfg.date_format, cfg.delimiter)
        series.append(load_series(layout, cfg.transform, cfg.annualization_days, label=col if len(set(ins)) == 1 else f"{Path(path).stem}:{col}"))
    return series


def _fit(cfg: RunConfig) -> FitResult:
    series = _load_inputs(cfg)
    smoother = SmootherConfig.from_months(cfg.bandwidth_months, Kernel(cfg.kernel))
    opts = SpFitOptions(smoother=smoother, max_outer_iter=cfg.max_outer_iter, verbose=cfg.verbose)
    if cfg.kind in ("mem", "spmem"):
        if len(series) != 1:
            raise UsageError(f"--kind {cfg.kind} takes exactly one series")
        s = series[0]
        return fit_base_mem(s, MemOptions()) if cfg.kind == "mem" else fit_spmem(s, opts)
    if len(series) < 2:
        raise UsageError(f"--kind {cfg.kind} needs at least two series")
    panel = validate_panel(series)
    return fit_base_vmem(panel, VecOptions()) if cfg.kind == "vmem" else fit_spvmem(panel, opts)


def _fit_files(fit: FitResult, cfg: RunConfig) -> dict[str, str]:
    dates = [str(d) for d in fit.dates]
    labels = list(fit.labels)
    X = np.asarray(fit.x).reshape(fit.nobs, -1)
    Xi = np.asarray(fit.xi).reshape(fit.nobs, -1)
    E = np.asarray(fit.residuals).reshape(fit.nobs, -1)
    mu = np.atleast_1d(fit.mu)
    tau = fit.tau
    comp_header = ["date", "series", "x", "mu", "mu_tau", "mu_tau_xi"]
    comp_rows = []
    for i, lab in enumerate(labels):
        for t in range(fit.nobs):
            comp_rows.append([dates[t], lab, X[t, i], mu[i], mu[i] * tau[t], mu[i] * tau[t] * Xi[t, i]])
    est = estimates_table(fit, cfg.lags)
    max_lag = min(cfg.acf_lags, int(np.ceil(fit.nobs / 4)) - 1)
    acf_rows = []
    for i, lab in enumerate(labels):
        for lag, r, lo, hi in acf(E[:, i], max_lag).to_rows():
            acf_rows.append({"series": lab, "lag": lag, "acf": r, "lower": lo, "upper": hi})
    lb = ljung_box_table(E, cfg.lags)
    lb["labels"] = labels
    return {
        "fit.json": fit.to_json(indent=1) + "\n",
        "estimates.csv": _dict_rows_csv(est),
        "estimates.json": _json_text(est),
        "components.csv": _csv_text(comp_header, comp_rows),
        "residuals.csv": _csv_text(["date", *labels], [[dates[t], *E[t]] for t in range(fit.nobs)]),
        "acf.csv": _dict_rows_csv(acf_rows),
        "acf.json": _json_text(acf_rows),
        "ljung_box.json": _json_text(lb),
    }


def cmd_fit(cfg: RunConfig) -> int:
    fit = _fit(cfg)
    _commit(cfg.out, _fit_files(fit, cfg))
    return 0


def _read_residuals(path: str) -> tuple[np.ndarray, list[str]]:
    p = Path(path)
    if p.suffix == ".json":
        fit = FitResult.from_json(p.read_text())
        E = np.asarray(fit.residuals).reshape(fit.nobs, -1)
        return E, list(fit.labels) or [f"s{i + 1}" for i in range(E.shape[1])]
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no residual rows")
    header = rows[0]
    cols = [j for j, h in enumerate(header) if h != "date"]
    if not cols:
        raise ValueError(f"{path}: no residual columns")
    try:
        E = np.array([[float(r[j]) for j in cols] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed residual file ({exc})") from None
    return E, [header[j] for j in cols]


def cmd_gof(cfg: RunConfig) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("gof takes one --input (residuals.csv or fit.json)")
    E, labels = _read_residuals(cfg.inputs[0])
    s2 = np.mean((E - 1.0) ** 2, axis=0)
    rows = gof_table(E, s2, labels)
    _commit(cfg.out, {"gof.csv": _dict_rows_csv(rows), "gof.json": _json_text(rows)})
    return 0


def cmd_forecast(cfg: RunConfig) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("forecast takes one --input (fit.json)")
    fit = FitResult.from_json(Path(cfg.inputs[0]).read_text())
    F = np.asarray(forecast_mean(fit, cfg.horizons)).reshape(cfg.horizons, -1)
    labels = list(fit.labels) or [f"s{i + 1}" for i in range(F.shape[1])]
    rows = [{"h": h + 1, **{lab: float(F[h, i]) for i, lab in enumerate(labels)}} for h in range(cfg.horizons)]
    _commit(cfg.out, {"forecasts.csv": _dict_rows_csv(rows), "forecasts.json": _json_text(rows)})
    return 0


def _sim_spec(cfg: RunConfig) -> tuple[DgpSpec, int]:
    x = cfg.extra
    if not x["sigma2"] > 0:
        raise UsageError("--sigma2 must be positive")
    if x["T"] < 100:
        raise UsageError("--T must be at least 100")
    K = x["K"]
    dist = calibrate(x["dist"], x["sigma2"])
    profile = Constant() if x["tau"] == "constant" else Sinusoid(x["amplitude"], x["periods"])
    if K == 1:
        b_star = x["beta_star"]
        params = UniParams(b_star - x["alpha1"] - x["gamma1"] / 2, x["alpha1"], x["gamma1"])
        return DgpSpec(params, x["mu"], profile, dist, seed=cfg.seed, labels=("x",)), x["T"]
    if K < 1:
        raise UsageError("--K must be >= 1")
    a = np.full((K, K), x["cross_alpha"])
    np.fill_diagonal(a, x["alpha1"])
    g = np.eye(K) * x["gamma1"]
    b = np.eye(K) * (x["beta_star"] - x["alpha1"] - x["gamma1"] / 2)
    R = np.full((K, K), x["rho"])
    np.fill_diagonal(R, 1.0)
    labels = tuple(f"x{i + 1}" for i in range(K))
    return DgpSpec(VecParams(b, a, g), x["mu"], profile, dist, R, seed=cfg.seed, labels=labels), x["T"]


def cmd_simulate(cfg: RunConfig) -> int:
    spec, T = _sim_spec(cfg)
    res = simulate(spec, T)
    d = res.data
    dates = [str(v) for v in d.dates]
    X = d.X if isinstance(d, AlignedPanel) else d.values[:, None]
    labels = list(spec.labels)
    sim_rows = [[dates[t], repr(float(d.returns[t])), *(repr(float(v)) for v in X[t])] for t in range(T)]
    xi = res.xi.reshape(T, -1)
    eps = res.eps.reshape(T, -1)
    truth_header = ["date", "tau", *(f"xi_{lab}" for lab in labels), *(f"eps_{lab}" for lab in labels)]
    truth_rows = [[dates[t], repr(float(res.tau[t])), *(repr(float(v)) for v in xi[t]), *(repr(float(v)) for v in eps[t])] for t in range(T)]
    meta = {
        "T": T,
        "seed": cfg.seed,
        "labels": labels,
        "mu": np.atleast_1d(res.mu).tolist(),
        "params": spec.params.to_dict(),
        "error": calibrate(cfg.extra["dist"], cfg.extra["sigma2"]).to_dict(),
        "tau_profile": cfg.extra["tau"],
    }
    _commit(
        cfg.out,
        {
            "sim.csv": _csv_text(["date", "return", *labels], sim_rows),
            "truth.csv": _csv_text(truth_header, truth_rows),
            "sim.json": _json_text(meta),
        },
    )
    return 0


COMMANDS = {"fit": cmd_fit, "gof": cmd_gof, "forecast": cmd_forecast, "simulate": cmd_simulate}


# --------------------------------------------------------------------------
# argument parsing


def _int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in str(s).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _str_list(s: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in str(s).split(",") if v.strip())


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON file with default settings")
    p.add_argument("--seed", type=int)
    p.add_argument("--verbose", action="store_true")


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", default=None, help="CSV file (repeatable)")
    p.add_argument("--value-column", type=_str_list, default=("value",), help="column(s), comma separated")
    p.add_argument("--date-column", default="date")
    p.add_argument("--returns-column", default=None)
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--transform", choices=TRANSFORMS, default="level", help="rk: realized variance; absret: signed returns; level: volatility as given")
    p.add_argument("--annualization-days", type=int, default=252)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memkit", description="Multiplicative error models with a smooth long-run component.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate a model and write tables and component paths")
    _common(p)
    _data_flags(p)
    p.add_argument("--kind", choices=KINDS, default="spmem")
    p.add_argument("--bandwidth-months", type=float, default=6.0)
    p.add_argument("--max-outer-iter", type=int, default=50)
    p.add_argument("--kernel", choices=[k.value for k in Kernel], default="gaussian")
    p.add_argument("--lags", type=_int_list, default=DEFAULT_LAGS)
    p.add_argument("--acf-lags", type=int, default=50)

    p = sub.add_parser("gof", help="AD and CvM tests of residuals against the four densities")
    _common(p)
    p.add_argument("--input", action="append", default=None, help="residuals.csv or fit.json")

    p = sub.add_parser("forecast", help="h-step conditional mean forecasts from a saved fit")
    _common(p)
    p.add_argument("--input", action="append", default=None, help="fit.json")
    p.add_argument("--horizons", type=int, default=22, help="maximum horizon H")

    p = sub.add_parser("simulate", help="write a simulated CSV fixture")
    _common(p)
    p.add_argument("--T", type=int, default=3000)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--dist", choices=[k.value for k in DistKind], default="gamma")
    p.add_argument("--sigma2", type=float, default=0.15)
    p.add_argument("--beta-star", type=float, default=0.88)
    p.add_argument("--alpha1", type=float, default=0.10)
    p.add_argument("--gamma1", type=float, default=0.15)
    p.add_argument("--cross-alpha", type=float, default=0.05)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=15.0)
    p.add_argument("--tau", choices=("constant", "sinusoid"), default="constant")
    p.add_argument("--amplitude", type=float, default=0.3)
    p.add_argument("--periods", type=float, default=1.0)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    file_cfg = _load_config(ns.config)
    if file_cfg:
        sub = parser._subparsers._group_actions[0].choices[ns.command]
        known = {a.dest for a in sub._actions}
        unknown = set(file_cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        conv = {"lags": _int_list, "value_column": _str_list}
        sub.set_defaults(**{k: conv[k](v) if k in conv and isinstance(v, str) else v for k, v in file_cfg.items()})
        ns = parser.parse_args(argv)
    d = vars(ns)
    base = {
        "command": ns.command,
        "out": Path(ns.out),
        "inputs": tuple(d.get("input") or ()),
        "seed": ns.seed,
        "verbose": ns.verbose,
    }
    for key, attr in (
        ("kind", "kind"),
        ("value_columns", "value_column"),
        ("date_column", "date_column"),
        ("returns_column", "returns_column"),
        ("date_format", "date_format"),
        ("delimiter", "delimiter"),
        ("transform", "transform"),
        ("annualization_days", "annualization_days"),
        ("bandwidth_months", "bandwidth_months"),
        ("max_outer_iter", "max_outer_iter"),
        ("kernel", "kernel"),
        ("lags", "lags"),
        ("acf_lags", "acf_lags"),
        ("horizons", "horizons"),
    ):
        if attr in d:
            v = d[attr]
            base[key] = tuple(v) if isinstance(v, list) else v
    if ns.command == "simulate":
        base["extra"] = {k: d[k] for k in ("T", "K", "dist", "sigma2", "beta_star", "alpha1", "gamma1", "cross_alpha", "rho", "mu", "tau", "amplitude", "periods")}
    cfg = RunConfig(**base)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"memkit: usage error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"memkit: cannot read config: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"memkit: usage error: {exc}", file=sys.stderr)
        return 2
    except (MemError, OSError, ValueError, KeyError) as exc:
        print(f"memkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
