"""Optimizers for the quantile recursion."""

import numpy as np

from ..model import CaviarParams, _returns
from .genetic import GaConfig, decode_chromosome, decode_population, ga_minimize, ga_optimize
from .gradient import EarlyStopping, GdConfig, gd_minimize, gd_optimize
from .quantreg import check_loss, linear_qr
from .trace import Trace, TraceRecord

__all__ = [
    "EarlyStopping",
    "GaConfig",
    "GdConfig",
    "Trace",
    "TraceRecord",
    "check_loss",
    "decode_chromosome",
    "decode_population",
    "ga_minimize",
    "ga_optimize",
    "gd_minimize",
    "gd_optimize",
    "init_from_qr",
    "linear_qr",
]


def init_from_qr(panel, k):
    """Intercepts from per-market intercept-only quantile regression; A = B = 0."""
    y = _returns(panel)
    T, n = y.shape
    ones = np.ones((T, 1))
    c = np.array([linear_qr(ones, y[:, i], k)[0] for i in range(n)])
    return CaviarParams(k, c, np.zeros((n, n)), np.zeros((n, n)))
