"""Multiplicative error models for volatility series with a smooth long-run
component, estimated by kernel smoothing alternated with efficient GMM."""

from .data import (
    AlignedPanel,
    DistKind,
    DistSpec,
    FitResult,
    ObservationSeries,
    UniParams,
    VecParams,
    validate_panel,
)
from .mem import MemOptions, fit_mem, forecast_xi, xi_filter, xi_gradient
from .smoother import Kernel, SmootherConfig, nw_smooth
from .spfit import SpFitOptions, fit_base_mem, fit_base_vmem, fit_spmem, fit_spvmem, forecast_mean
from .vmem import VecOptions, vgmm_fit, wald_test

__version__ = "0.1.0"

__all__ = [
    "AlignedPanel",
    "DistKind",
    "DistSpec",
    "FitResult",
    "Kernel",
    "MemOptions",
    "ObservationSeries",
    "SmootherConfig",
    "SpFitOptions",
    "UniParams",
    "VecOptions",
    "VecParams",
    "fit_base_mem",
    "fit_base_vmem",
    "fit_mem",
    "fit_spmem",
    "fit_spvmem",
    "forecast_mean",
    "forecast_xi",
    "nw_smooth",
    "validate_panel",
    "vgmm_fit",
    "wald_test",
    "xi_filter",
    "xi_gradient",
]
