"""Gradient descent on the smoothed quantile loss with chronological
early stopping."""

import time
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..exceptions import OptimizerAbort, ShapeError, ValidationError
from ..model import CaviarParams, _returns, resolve_q0
from ..objective import default_bandwidth
from .trace import Trace

__all__ = ["EarlyStopping", "GdConfig", "gd_minimize", "gd_optimize", "sensitivity_metric"]

_METRICS = ("sensitivity", "euclidean")


@dataclass(frozen=True)
class GdConfig:
    """Gradient-descent settings.

    ``metric="sensitivity"`` scales the step by the inverse of the
    density-weighted Gram matrix of the quantile sensitivities, which makes
    ``learning_rate`` dimensionless. ``"euclidean"`` is the textbook update
    ``theta - r * grad``. ``h=None`` uses 1% of the pooled return standard
    deviation. With ``backtrack`` the step is halved until the train loss
    does not increase; otherwise it is halved only while the loss is
    non-finite.
    """

    learning_rate: float = 1.0
    max_iter: int = 200
    patience: int = 10
    split: float = 0.8
    h: float = None
    seed: int = 0
    metric: str = "sensitivity"
    tol: float = 1e-10
    max_halvings: int = 30
    ridge: float = 1e-6
    backtrack: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be positive")
        if not 0.0 < self.split < 1.0:
            raise ValidationError("split must lie in (0, 1)")
        if int(self.patience) < 1:
            raise ValidationError("patience must be >= 1")
        if int(self.max_iter) < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.h is not None and not self.h > 0:
            raise ValidationError("bandwidth h must be positive")
        if self.metric not in _METRICS:
            raise ValidationError(f"metric must be one of {_METRICS}")


class EarlyStopping:
    """Counts consecutive rises of a monitored loss.

    ``update`` returns True once the loss has risen on ``patience``
    consecutive calls; any non-rise resets the count.
    """

    def __init__(self, patience):
        if int(patience) < 1:
            raise ValidationError("patience must be >= 1")
        self.patience = int(patience)
        self.rises = 0
        self._prev = None

    def update(self, value):
        if self._prev is not None:
            self.rises = self.rises + 1 if value > self._prev else 0
        self._prev = value
        return self.rises >= self.patience


def gd_minimize(fun, grad, x0, learning_rate=0.1, max_iter=100, tol=0.0, record_time=False):
    """Plain steepest descent ``x - r * grad(x)`` on an arbitrary objective.

    Returns the final iterate and a trace of objective values. Stops early
    when the gradient norm drops to ``tol``.
    """
    if not learning_rate > 0:
        raise ValidationError("learning_rate must be positive")
    x = np.array(x0, dtype=float, copy=True)
    trace = Trace()
    for _ in range(int(max_iter)):
        t0 = time.perf_counter()
        g = np.asarray(grad(x), dtype=float)
        value = float(fun(x))
        if not (np.isfinite(value) and np.all(np.isfinite(g))):
            raise OptimizerAbort("non-finite objective or gradient", params=x, trace=trace)
        trace.append(value, millis=(time.perf_counter() - t0) * 1e3 if record_time else None)
        if np.linalg.norm(g) <= tol:
            break
        x = x - learning_rate * g
    return x, trace


def residual_density(resid):
    """Gaussian-kernel density of each column of residuals at zero."""
    T = resid.shape[0]
    sd = resid.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    b = 1.06 * sd * T ** (-0.2)
    return np.exp(-0.5 * (resid / b) ** 2).mean(axis=0) / (b * np.sqrt(2.0 * np.pi))


def sensitivity_metric(gram, resid, w, ridge=1e-8):
    """``sum_i w_i f_i G_i`` with ``f_i`` the residual density of market i."""
    f = residual_density(resid)
    M = np.einsum("i,iab->ab", w * f, gram)
    M += ridge * max(np.trace(M), 1e-300) / M.shape[0] * np.eye(M.shape[0])
    return M


class _GdState:
    def __init__(self, y_train, q0, k, h, w, metric, ridge, free):
        self.y = y_train
        self.q0 = q0
        self.k = k
        self.h = h
        self.w = w
        self.metric = metric
        self.ridge = ridge
        self.free = free
        n = y_train.shape[1]
        p = _kernels.n_params(n)
        self.grad = np.empty(p)
        self.resid = np.empty_like(y_train)
        self.gram = np.empty((n, p, p))

    def evaluate(self, theta):
        if self.metric == "euclidean":
            loss = _kernels.grad_kernel(theta, self.y, self.q0, self.k, self.h, self.w, self.grad)
            return loss, np.where(self.free, self.grad, 0.0)
        loss = _kernels.grad_gram_kernel(theta, self.y, self.q0, self.k, self.h, self.w, self.grad, self.resid, self.gram)
        if not np.isfinite(loss):
            return loss, None
        M = sensitivity_metric(self.gram, self.resid, self.w, self.ridge)[np.ix_(self.free, self.free)]
        g = self.grad[self.free]
        try:
            step = np.linalg.solve(M, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(M, g, rcond=None)[0]
        direction = np.zeros_like(self.grad)
        direction[self.free] = step
        return loss, direction

    def loss(self, theta):
        return _kernels.loss_kernel(theta, self.y, self.q0, self.k, self.h, self.w, 0, self.y.shape[0])


def gd_optimize(panel, init, cfg=GdConfig(), q0="empirical", weights=None, free=None, validate=True, record_time=True):
    """Minimize the smoothed loss on the leading ``split`` fraction of rows.

    Each iteration records the smoothed train loss and the exact loss on the
    held-out tail (scored along the full-sample path). Stops after
    ``max_iter`` steps, after ``patience`` consecutive rises of the
    validation loss, or when the train loss stalls. Returns the iterate with
    the lowest validation loss. ``free`` is an optional boolean mask over
    the flattened parameters; masked-out entries stay at their initial
    values.

    With ``validate=False`` every row is used for training, no validation
    loss is recorded, and the last iterate is returned.
    """
    y = np.ascontiguousarray(_returns(panel), dtype=float)
    T, n = y.shape
    if n != init.n:
        raise ShapeError(f"init is for {init.n} markets, panel has {n}")
    s = int(round(cfg.split * T)) if validate else T
    if s < 2 or (validate and s >= T):
        raise ValidationError(f"split {cfg.split} leaves no usable train/validation rows for T={T}")
    k = init.k
    h = cfg.h if cfg.h is not None else default_bandwidth(y)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    q0 = resolve_q0(q0, y, k)
    p = _kernels.n_params(n)
    free = np.ones(p, dtype=bool) if free is None else np.asarray(free, dtype=bool).reshape(-1)
    if free.size != p:
        raise ShapeError(f"free mask has length {free.size}, expected {p}")
    state = _GdState(np.ascontiguousarray(y[:s]), q0, k, h, w, cfg.metric, cfg.ridge, free)

    theta = init.to_vector()
    trace = Trace()
    best_val, best_theta = np.inf, None
    prev_train = None
    stopper = EarlyStopping(cfg.patience)
    for _ in range(int(cfg.max_iter)):
        t0 = time.perf_counter()
        train, direction = state.evaluate(theta)
        if not np.isfinite(train) or direction is None or not np.all(np.isfinite(direction)):
            raise OptimizerAbort(
                "non-finite loss or gradient",
                params=CaviarParams.from_vector(k, best_theta if best_theta is not None else theta, n),
                trace=trace,
            )
        if validate:
            val = _kernels.loss_kernel(theta, y, q0, k, 0.0, w, s, T)
        else:
            val = train
        if val <= best_val:
            best_val, best_theta = val, theta.copy()
        trace.append(
            train, val_loss=val if validate else None, millis=(time.perf_counter() - t0) * 1e3 if record_time else None
        )

        if validate and stopper.update(val):
            break
        if prev_train is not None and abs(prev_train - train) <= cfg.tol * max(abs(train), 1e-300):
            break
        prev_train = train

        r = cfg.learning_rate
        accepted = False
        finite_seen = False
        for _ in range(int(cfg.max_halvings) + 1):
            trial = theta - r * direction
            trial_loss = state.loss(trial)
            if np.isfinite(trial_loss):
                finite_seen = True
                if not cfg.backtrack or trial_loss <= train:
                    accepted = True
                    break
            r *= 0.5
        if not accepted:
            if finite_seen:
                break
            raise OptimizerAbort(
                "every step along the descent direction diverges",
                params=CaviarParams.from_vector(k, best_theta, n),
                trace=trace,
            )
        theta = trial
    return CaviarParams.from_vector(k, best_theta, n), trace
