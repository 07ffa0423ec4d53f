"""Regression-quantile objective, its softplus-smoothed surrogate, and
exact gradients through the quantile recursion."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ShapeError, ValidationError
from .model import _returns, resolve_q0

__all__ = [
    "GradResult",
    "LossConfig",
    "default_bandwidth",
    "model_loss",
    "model_loss_grad",
    "pinball_loss",
    "smoothed_pinball",
    "smoothed_pinball_slope",
]


@dataclass(frozen=True)
class LossConfig:
    """Loss settings. ``h = 0`` selects the exact, non-smooth kernel."""

    k: float
    h: float = 0.0
    weights: tuple = None

    def __post_init__(self):
        if not 0.0 < self.k < 1.0:
            raise ValidationError("k must lie in (0, 1)")
        if not (np.isfinite(self.h) and self.h >= 0):
            raise ValidationError("bandwidth h must be >= 0")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0) or not np.any(w > 0):
                raise ValidationError("weights must be >= 0 and not all zero")

    def weight_vector(self, n):
        if self.weights is None:
            return np.ones(n)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != n:
            raise ShapeError(f"{w.size} weights for {n} markets")
        return w


@dataclass(frozen=True)
class GradResult:
    loss: float
    gradient: np.ndarray


def default_bandwidth(panel):
    """1% of the pooled standard deviation of the returns."""
    return 0.01 * float(np.std(_returns(panel)))


def pinball_loss(k, y, f):
    """Mean of ``[k - 1(y < f)] * (y - f)``; every term is non-negative."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    if y.shape != f.shape:
        raise ShapeError(f"y and f differ in shape: {y.shape} vs {f.shape}")
    if y.size == 0:
        raise ShapeError("pinball loss of an empty sample")
    u = y - f
    return float(np.mean((k - (u < 0)) * u))


def smoothed_pinball(k, u, h):
    """``k*u + h*softplus(-u/h)``, within ``h*ln 2`` of the exact kernel."""
    if not h > 0:
        raise ValidationError("bandwidth h must be positive")
    u = np.asarray(u, dtype=float)
    return k * u + h * np.logaddexp(0.0, -u / h)


def smoothed_pinball_slope(k, u, h):
    """Derivative ``k - 1/(1 + exp(u/h))``."""
    if not h > 0:
        raise ValidationError("bandwidth h must be positive")
    u = np.asarray(u, dtype=float)
    return k - 0.5 * (1.0 - np.tanh(u / (2.0 * h)))


def _prepare(params, panel, cfg, q0):
    y = np.ascontiguousarray(_returns(panel), dtype=float)
    if y.ndim != 2 or y.shape[1] != params.n:
        raise ShapeError(f"params are for {params.n} markets, panel has shape {y.shape}")
    if y.shape[0] == 0:
        raise ShapeError("empty panel")
    return y, resolve_q0(q0, y, cfg.k), cfg.weight_vector(params.n)


def model_loss(params, panel, cfg, q0="empirical"):
    """Weighted sum over markets of the pinball loss of the fitted path.

    Divergent paths score ``inf`` rather than raising.
    """
    y, q0, w = _prepare(params, panel, cfg, q0)
    return float(_kernels.loss_kernel(params.to_vector(), y, q0, cfg.k, cfg.h, w, 0, y.shape[0]))


def model_loss_grad(params, panel, cfg, q0="empirical"):
    """Smoothed loss and its exact gradient in flattening order.

    A divergent path returns ``inf`` loss and a NaN gradient.
    """
    if not cfg.h > 0:
        raise ValidationError("the exact loss is not differentiable; use h > 0")
    y, q0, w = _prepare(params, panel, cfg, q0)
    grad = np.empty(_kernels.n_params(params.n))
    loss = _kernels.grad_kernel(params.to_vector(), y, q0, cfg.k, cfg.h, w, grad)
    if not np.isfinite(loss):
        grad[:] = np.nan
    return GradResult(float(loss), grad)
