"""The n-market multi-quantile CAViaR recursion

    q_t = c + A |y_{t-1}| + B q_{t-1}

and a location-scale simulator whose true conditional quantile is q_t.
"""

import warnings
from dataclasses import dataclass, field
from datetime import date

import numpy as np
from scipy.stats import norm

from . import _kernels
from .exceptions import DGPValidityError, DomainError, ExplosivePathError, ShapeError, ValidationError
from .panel import ReturnPanel

__all__ = [
    "CaviarParams",
    "SimConfig",
    "VarPath",
    "caviar_step",
    "empirical_q0",
    "n_params",
    "param_names",
    "simulate",
    "var_path",
]

DIVERGENCE_BOUND = _kernels.DIVERGENCE_BOUND
SIM_EPOCH = date(2000, 1, 1)


def n_params(n):
    return n + 2 * n * n


def param_names(n):
    """Labels in flattening order: ``c1..cn, a11..ann, b11..bnn``."""
    names = [f"c{i + 1}" for i in range(n)]
    names += [f"a{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    names += [f"b{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    return names


def _check_level(k):
    k = float(k)
    if not 0.0 < k < 1.0:
        raise ValidationError(f"quantile level must lie in (0, 1), got {k}")
    return k


@dataclass(frozen=True, eq=False)
class CaviarParams:
    """Parameters for one quantile level.

    ``A`` holds shock loadings on lagged absolute returns, ``B`` the
    loadings on lagged quantiles; off-diagonals are the spillover terms.
    """

    k: float
    c: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        k = _check_level(self.k)
        c = np.array(self.c, dtype=float).reshape(-1)
        n = c.size
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.shape != (n, n) or B.shape != (n, n):
            raise ShapeError(f"A and B must be {n}x{n}, got {A.shape} and {B.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DomainError("parameters must be finite")
        for name, value in (("k", k), ("c", c), ("A", A), ("B", B)):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n(self):
        return self.c.size

    def to_vector(self):
        return np.concatenate([self.c, self.A.ravel(), self.B.ravel()])

    @classmethod
    def from_vector(cls, k, theta, n=None):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if n is None:
            n = int(round((-1 + np.sqrt(1 + 8 * theta.size)) / 4))
        if theta.size != n_params(n):
            raise ShapeError(f"parameter vector of length {theta.size} does not fit n={n}")
        return cls(k, theta[:n], theta[n : n + n * n].reshape(n, n), theta[n + n * n :].reshape(n, n))

    @classmethod
    def zeros(cls, k, n):
        return cls.from_vector(k, np.zeros(n_params(n)), n)

    def replace(self, **changes):
        values = {"k": self.k, "c": self.c, "A": self.A, "B": self.B, **changes}
        return CaviarParams(**values)

    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.B))))

    def __eq__(self, other):
        if not isinstance(other, CaviarParams):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.to_vector(), other.to_vector())

    def __repr__(self):
        return f"CaviarParams(k={self.k}, c={self.c.tolist()}, A={self.A.tolist()}, B={self.B.tolist()})"


@dataclass(frozen=True, eq=False)
class VarPath:
    q: np.ndarray
    k: float
    q0: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings. ``q1`` defaults to the noiseless steady state
    ``(I - B)^{-1} c``."""

    params: CaviarParams
    T: int
    seed: int = 0
    innovation: str = "normal"
    markets: tuple = field(default=None)
    q1: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.T) < 2:
            raise ValidationError("simulation length T must be at least 2")
        if self.innovation != "normal":
            raise ValidationError(f"unsupported innovation distribution {self.innovation!r}")
        if self.markets is not None and len(self.markets) != self.params.n:
            raise ShapeError("one market label per simulated market")


def _check_vec(x, n, what):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != n:
        raise ShapeError(f"{what} has length {x.size}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} must be finite")
    return x


def caviar_step(params, y_prev, q_prev):
    """One recursion step ``c + A |y_prev| + B q_prev``."""
    y_prev = _check_vec(y_prev, params.n, "y_prev")
    q_prev = _check_vec(q_prev, params.n, "q_prev")
    return params.c + params.A @ np.abs(y_prev) + params.B @ q_prev


def _returns(panel):
    return panel.returns if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=float)


def empirical_q0(panel, k):
    """Per-market empirical k-quantile of the sample."""
    return np.quantile(_returns(panel), k, axis=0)


def resolve_q0(q0, y, k):
    if q0 is None or (isinstance(q0, str) and q0 == "empirical"):
        return np.ascontiguousarray(np.quantile(y, k, axis=0))
    return np.ascontiguousarray(_check_vec(q0, y.shape[1], "q0"))


def var_path(params, panel, q0="empirical"):
    """Iterate the recursion over a panel.

    Row 0 of the result is ``q0`` (the empirical k-quantile by default);
    row t uses returns and quantiles of row t-1.
    """
    y = np.ascontiguousarray(_returns(panel), dtype=float)
    if y.ndim != 2 or y.shape[0] == 0:
        raise ShapeError("panel must be a non-empty T x n array")
    if y.shape[1] != params.n:
        raise ShapeError(f"params are for {params.n} markets, panel has {y.shape[1]}")
    q0 = resolve_q0(q0, y, params.k)
    out = np.empty_like(y)
    t = _kernels.path_kernel(params.to_vector(), y, q0, out)
    if t >= 0:
        raise ExplosivePathError(t + 1)
    return VarPath(out, params.k, q0)


def simulate(config):
    """Draw a return panel whose true conditional k-quantile is the recursion.

    ``y[t, i] = q[t, i] / z_k * eps[t, i]`` with standard-normal ``eps`` and
    ``z_k`` the standard-normal k-quantile; ``|y[t]|`` then drives ``q[t+1]``.
    """
    params = config.params
    n, T, k = params.n, int(config.T), params.k
    if params.spectral_radius() >= 1.0:
        warnings.warn("spectral radius of B is >= 1; simulated path may explode", RuntimeWarning, stacklevel=2)
    zk = norm.ppf(k)
    if zk == 0.0:
        raise DGPValidityError("k = 0.5 leaves the location-scale DGP undefined")
    if config.q1 is not None:
        q1 = _check_vec(config.q1, n, "q1")
    else:
        try:
            q1 = np.linalg.solve(np.eye(n) - params.B, params.c)
        except np.linalg.LinAlgError:
            q1 = params.c.copy()
    rng = np.random.default_rng(config.seed)
    eps = rng.standard_normal((T, n))
    y = np.empty((T, n))
    q = np.empty((T, n))
    t, i = _kernels.simulate_kernel(params.to_vector(), eps, 1.0 / zk, q1, y, q)
    if t >= 0:
        if abs(q[t, i]) > DIVERGENCE_BOUND or not np.isfinite(q[t, i]):
            raise ExplosivePathError(t + 1)
        raise DGPValidityError(
            f"simulated quantile q[{t + 1}, {i + 1}] = {q[t, i]:.4g} has the wrong sign for k = {k}"
        )
    dates = np.datetime64(SIM_EPOCH, "D") + np.arange(T)
    markets = config.markets or tuple(f"m{i + 1}" for i in range(n))
    return ReturnPanel(dates, markets, y), VarPath(q, k, q[0].copy())
