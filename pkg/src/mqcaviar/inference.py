"""Moving-block bootstrap covariance and joint Wald tests of spillover
restrictions."""

import warnings
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.covariance import MinCovDet

from ._stats import chi2_sf
from .exceptions import CovarianceUnreliableError, ExplosivePathError, OptimizerAbort, ShapeError, ValidationError
from .model import _returns, n_params, param_names
from .optimize import GdConfig, gd_optimize

__all__ = [
    "SPILLOVER_HYPOTHESES",
    "CovEstimate",
    "WaldTestResult",
    "block_bootstrap_indices",
    "bootstrap_cov",
    "chi2_sf",
    "draws_covariance",
    "spillover_suite",
    "wald_test",
]

MIN_RELIABLE_REPLICATES = 50
MAX_FAILED_FRACTION = 0.2
ROBUST_SUPPORT = 0.9
_COV_METHODS = ("robust", "sample")

# (label, parameter names set to zero, reading when the null holds)
SPILLOVER_HYPOTHESES = (
    ("a12=a21=b12=b21=0", ("a12", "a21", "b12", "b21"), "no extreme risk spillover interaction"),
    ("a21=b21=0", ("a21", "b21"), "market 1 no extreme risk spillover interaction market 2"),
    ("a12=b12=0", ("a12", "b12"), "market 2 no extreme risk spillover interaction on market 1"),
)


@dataclass(frozen=True, eq=False)
class CovEstimate:
    covariance: np.ndarray
    replicates: int
    block_len: int
    failed: int = 0
    reliable: bool = True

    @property
    def standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


@dataclass(frozen=True)
class WaldTestResult:
    hypothesis: str
    restriction: tuple
    statistic: float
    df: int
    pvalue: float
    decision: str
    direction: str = ""
    pinv_used: bool = False

    @property
    def rejected(self):
        return self.decision == "reject"


def default_block_len(T):
    return int(np.ceil(T ** (1.0 / 3.0)))


def block_bootstrap_indices(T, block_len, rng):
    """Row indices of one moving-block resample of length T."""
    n_blocks = -(-T // block_len)
    starts = rng.integers(0, T - block_len + 1, size=n_blocks)
    return (starts[:, None] + np.arange(block_len)[None, :]).ravel()[:T]


def _sample_cov(draws):
    centered = draws - draws.mean(axis=0)
    return centered.T @ centered / max(len(draws) - 1, 1)


def draws_covariance(draws, method="robust", seed=0):
    """Covariance of bootstrap parameter draws.

    ``"robust"`` is the reweighted minimum covariance determinant estimate
    with a 90% support fraction, which discounts the occasional refit that
    wanders along a flat direction of the loss. Constant columns (frozen
    parameters) get zero rows and columns. With too few draws for the
    robust fit, or ``method="sample"``, the usual sample covariance is
    returned.
    """
    if method not in _COV_METHODS:
        raise ValidationError(f"covariance method must be one of {_COV_METHODS}")
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    m, p = draws.shape
    cov = np.zeros((p, p))
    live = np.flatnonzero(np.ptp(draws, axis=0) > 0)
    if live.size == 0:
        return cov
    sub = draws[:, live]
    if method == "robust" and m > 2 * live.size + 2:
        state = int(np.random.SeedSequence(seed).generate_state(1)[0])
        mcd = MinCovDet(support_fraction=ROBUST_SUPPORT, random_state=state).fit(sub)
        block = mcd.covariance_
    else:
        block = _sample_cov(sub)
    cov[np.ix_(live, live)] = block
    return 0.5 * (cov + cov.T)


def _refit(y, idx, fitted, cfg, weights, free):
    try:
        params, _ = gd_optimize(y[idx], fitted, cfg, weights=weights, free=free, validate=False, record_time=False)
    except (OptimizerAbort, ExplosivePathError):
        return None
    return params.to_vector()


def bootstrap_cov(
    panel,
    fitted,
    fit_cfg=None,
    replicates=200,
    block_len=None,
    seed=0,
    n_jobs=1,
    refit_max_iter=50,
    weights=None,
    free=None,
    method="robust",
):
    """Covariance of the parameter estimates from moving-block resamples.

    Each replicate resamples whole rows in blocks, refits by gradient
    descent on the whole resample (no validation split) warm-started at
    ``fitted`` with at most ``refit_max_iter`` iterations, and contributes
    one parameter vector. Replicate seeds are spawned from ``seed`` by
    index, so the result does not depend on ``n_jobs``. ``method`` is
    passed to :func:`draws_covariance`.
    """
    y = np.ascontiguousarray(_returns(panel), dtype=float)
    T = y.shape[0]
    replicates = int(replicates)
    if method not in _COV_METHODS:
        raise ValidationError(f"covariance method must be one of {_COV_METHODS}")
    if replicates < 1:
        raise ValidationError("need at least one replicate")
    block_len = default_block_len(T) if block_len is None else int(block_len)
    if not 1 <= block_len < T:
        raise ValidationError(f"block length must lie in [1, {T})")
    cfg = fit_cfg if isinstance(fit_cfg, GdConfig) else GdConfig()
    cfg = replace(cfg, max_iter=min(cfg.max_iter, int(refit_max_iter)))

    children = np.random.SeedSequence(seed).spawn(replicates)
    indices = [block_bootstrap_indices(T, block_len, np.random.default_rng(ch)) for ch in children]
    if n_jobs == 1:
        results = [_refit(y, idx, fitted, cfg, weights, free) for idx in indices]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_refit)(y, idx, fitted, cfg, weights, free) for idx in indices)

    ok = [r for r in results if r is not None]
    failed = replicates - len(ok)
    p = n_params(fitted.n)
    cov = draws_covariance(np.array(ok), method, seed) if ok else np.zeros((p, p))
    estimate = CovEstimate(
        cov,
        len(ok),
        block_len,
        failed=failed,
        reliable=len(ok) >= MIN_RELIABLE_REPLICATES and failed <= MAX_FAILED_FRACTION * replicates,
    )
    if failed > MAX_FAILED_FRACTION * replicates:
        raise CovarianceUnreliableError(f"{failed} of {replicates} bootstrap refits failed", estimate=estimate)
    return estimate


def _as_matrix(cov):
    return cov.covariance if isinstance(cov, CovEstimate) else np.asarray(cov, dtype=float)


def wald_test(theta_hat, cov, restriction, alpha=0.05, label=None, direction=""):
    """Joint test that the flattened parameters in ``restriction`` are zero.

    ``W = r' V_r^{-1} r`` against chi-square with ``len(restriction)``
    degrees of freedom; a singular ``V_r`` falls back to the pseudo-inverse
    and sets ``pinv_used``.
    """
    theta_hat = np.asarray(theta_hat, dtype=float).reshape(-1)
    V = _as_matrix(cov)
    if V.shape != (theta_hat.size, theta_hat.size):
        raise ShapeError(f"covariance shape {V.shape} does not match {theta_hat.size} parameters")
    idx = [int(i) for i in restriction]
    if not idx:
        raise ValidationError("restriction set is empty")
    if len(set(idx)) != len(idx) or min(idx) < 0 or max(idx) >= theta_hat.size:
        raise ValidationError(f"invalid restriction indices {idx}")
    r = theta_hat[idx]
    Vr = V[np.ix_(idx, idx)]
    pinv_used = False
    eig = np.linalg.eigvalsh(Vr)
    if eig.min() <= 1e-12 * max(eig.max(), 0.0) or eig.max() <= 0:
        pinv_used = True
        warnings.warn("restricted covariance is singular; using the pseudo-inverse", RuntimeWarning, stacklevel=2)
        W = float(r @ np.linalg.pinv(Vr, hermitian=True) @ r)
    else:
        W = float(r @ np.linalg.solve(Vr, r))
    W = max(W, 0.0)
    p = chi2_sf(W, len(idx))
    return WaldTestResult(
        hypothesis=label or ",".join(str(i) for i in idx),
        restriction=tuple(idx),
        statistic=W,
        df=len(idx),
        pvalue=p,
        decision="reject" if p < alpha else "accept",
        direction=direction,
        pinv_used=pinv_used,
    )


def spillover_suite(fit, alpha=0.05):
    """The three cross-market restrictions for a two-market fit.

    ``fit`` needs ``params`` (two markets) and ``cov``.
    """
    params = fit.params
    if params.n != 2:
        raise ValidationError("the spillover suite is defined for two-market models")
    names = param_names(2)
    theta = params.to_vector()
    out = []
    for label, zeroed, reading in SPILLOVER_HYPOTHESES:
        idx = [names.index(z) for z in zeroed]
        out.append(wald_test(theta, fit.cov, idx, alpha=alpha, label=label, direction=reading))
    return out
