"""Multivariate multi-quantile CAViaR: estimation, spillover tests,
pseudo-impulse responses and VaR alerts."""

from .estimator import FitResult, LinearQuantileRegressor, MQCaviar, fit_model
from .exceptions import MQCaviarError
from .inference import CovEstimate, WaldTestResult, bootstrap_cov, chi2_sf, spillover_suite, wald_test
from .irf import Alert, IrfResult, compare_spillover, generate_alerts, pseudo_irf
from .model import CaviarParams, SimConfig, VarPath, caviar_step, simulate, var_path
from .objective import LossConfig, model_loss, model_loss_grad, pinball_loss, smoothed_pinball
from .optimize import GaConfig, GdConfig, Trace, decode_chromosome, ga_optimize, gd_optimize, linear_qr
from .panel import DescriptiveStats, RawSeries, ReturnPanel, adf_test, align, describe, log_returns

__version__ = "0.1.0"

__all__ = [
    "Alert",
    "CaviarParams",
    "CovEstimate",
    "DescriptiveStats",
    "FitResult",
    "GaConfig",
    "GdConfig",
    "IrfResult",
    "LinearQuantileRegressor",
    "LossConfig",
    "MQCaviar",
    "MQCaviarError",
    "RawSeries",
    "ReturnPanel",
    "SimConfig",
    "Trace",
    "VarPath",
    "WaldTestResult",
    "adf_test",
    "align",
    "bootstrap_cov",
    "caviar_step",
    "chi2_sf",
    "compare_spillover",
    "decode_chromosome",
    "describe",
    "fit_model",
    "ga_optimize",
    "gd_optimize",
    "generate_alerts",
    "linear_qr",
    "log_returns",
    "model_loss",
    "model_loss_grad",
    "pinball_loss",
    "pseudo_irf",
    "simulate",
    "smoothed_pinball",
    "spillover_suite",
    "var_path",
    "wald_test",
]
