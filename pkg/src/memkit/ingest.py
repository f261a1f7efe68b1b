"""CSV loading and the volatility measurement conventions.

* realized kernel variance RK_t -> 100 sqrt(days RK_t)
* signed daily return r_t -> |r_t| sqrt(pi/2) 100 sqrt(days)
* implied-volatility quotes are used as they are
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import ObservationSeries, as_dates
from .errors import DuplicateDate, NegativeValue, ParseError

__all__ = [
    "CsvLayout",
    "RawSeries",
    "Transform",
    "absolute_returns_to_vol",
    "load_csv",
    "load_series",
    "realized_kernel_to_vol",
    "vol_to_absolute_returns",
    "vol_to_realized_kernel",
    "write_csv",
]

DEFAULT_DAYS = 252
ABS_RETURN_SCALE = math.sqrt(math.pi / 2.0)

Transform = str  # one of "rk", "absret", "level"
TRANSFORMS = ("rk", "absret", "level")


@dataclass(frozen=True)
class CsvLayout:
    path: str | Path
    date_column: str = "date"
    value_column: str = "value"
    return_column: str | None = None
    date_format: str = "%Y-%m-%d"
    delimiter: str = ","


@dataclass(frozen=True, eq=False)
class RawSeries:
    """Parsed CSV columns, sorted by date; ``returns`` is NaN where absent."""

    dates: np.ndarray
    values: np.ndarray
    returns: np.ndarray


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        v = float(cell)
    except (TypeError, ValueError):
        raise ParseError(row, column, f"not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise ParseError(row, column, f"not finite: {cell!r}")
    return v


def load_csv(layout: CsvLayout) -> RawSeries:
    """Read the date, value and (optional) return columns.

    Rows keep their file order for error reporting (``row`` counts data rows
    from 1) and are then sorted by date.  Empty return cells become NaN.
    """
    path = Path(layout.path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh, delimiter=layout.delimiter)
        header = reader.fieldnames
        if not header:
            raise ParseError(0, None, f"{path}: missing header row")
        needed = [layout.date_column, layout.value_column]
        if layout.return_column:
            needed.append(layout.return_column)
        for col in needed:
            if col not in header:
                raise ParseError(0, col, f"{path}: column {col!r} not in header")
        dates, values, rets = [], [], []
        for row, rec in enumerate(reader, start=1):
            raw_date = (rec.get(layout.date_column) or "").strip()
            try:
                dates.append(datetime.strptime(raw_date, layout.date_format).date())
            except ValueError:
                raise ParseError(row, layout.date_column, f"bad date {raw_date!r}") from None
            values.append(_parse_float((rec.get(layout.value_column) or "").strip(), row, layout.value_column))
            if layout.return_column:
                cell = (rec.get(layout.return_column) or "").strip()
                rets.append(math.nan if cell == "" else _parse_float(cell, row, layout.return_column))
            else:
                rets.append(math.nan)
    d = np.array(dates, dtype="datetime64[D]")
    order = np.argsort(d, kind="stable")
    d = d[order]
    dup = np.nonzero(d[1:] == d[:-1])[0]
    if dup.size:
        raise DuplicateDate(f"{path}: duplicate date {d[dup[0]]}")
    return RawSeries(d, np.asarray(values, dtype=float)[order], np.asarray(rets, dtype=float)[order])


def absolute_returns_to_vol(
    returns, dates, annualization_days: int = DEFAULT_DAYS, label: str = "arVol"
) -> ObservationSeries:
    r = np.asarray(returns, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("returns must be finite")
    values = np.abs(r) * ABS_RETURN_SCALE * 100.0 * math.sqrt(annualization_days)
    return ObservationSeries(as_dates(dates), values, r, label)


def vol_to_absolute_returns(values, annualization_days: int = DEFAULT_DAYS) -> np.ndarray:
    """Inverse of the absolute-return transform (returns |r_t|; the sign is lost)."""
    return np.asarray(values, dtype=float) / (ABS_RETURN_SCALE * 100.0 * math.sqrt(annualization_days))


def realized_kernel_to_vol(
    rk_variance, dates, returns=None, annualization_days: int = DEFAULT_DAYS, label: str = "rkVol"
) -> ObservationSeries:
    rk = np.asarray(rk_variance, dtype=float)
    if np.any(rk < 0):
        raise NegativeValue(f"negative realized variance at index {int(np.argmax(rk < 0))}")
    values = 100.0 * np.sqrt(annualization_days * rk)
    r = np.full(rk.shape, np.nan) if returns is None else np.asarray(returns, dtype=float)
    return ObservationSeries(as_dates(dates), values, r, label)


def vol_to_realized_kernel(values, annualization_days: int = DEFAULT_DAYS) -> np.ndarray:
    v = np.asarray(values, dtype=float) / 100.0
    return v * v / annualization_days


def load_series(
    layout: CsvLayout,
    transform: Transform = "level",
    annualization_days: int = DEFAULT_DAYS,
    label: str | None = None,
) -> ObservationSeries:
    """Load one CSV and apply a measurement transform.

    ``rk``: the value column holds realized kernel variances; ``absret``: the
    value column holds signed daily returns (also used as the return column
    when none is given); ``level``: values are already volatilities.
    """
    raw = load_csv(layout)
    label = label or layout.value_column
    if transform == "rk":
        return realized_kernel_to_vol(raw.values, raw.dates, raw.returns, annualization_days, label)
    if transform == "absret":
        s = absolute_returns_to_vol(raw.values, raw.dates, annualization_days, label)
        if layout.return_column:
            return ObservationSeries(s.dates, s.values, raw.returns, label)
        return s
    if transform == "level":
        return ObservationSeries(raw.dates, raw.values, raw.returns, label)
    raise ValueError(f"unknown transform {transform!r}; expected one of {TRANSFORMS}")


def write_csv(path: str | Path, dates, columns: dict[str, Sequence[float]], date_column: str = "date") -> None:
    """Write dated columns in the layout ``load_csv`` reads (NaN -> empty cell)."""
    d = as_dates(dates)
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([date_column, *names])
        for t in range(d.shape[0]):
            w.writerow([str(d[t]), *("" if math.isnan(c[t]) else repr(float(c[t])) for c in cols)])
