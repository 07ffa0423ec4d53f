"""Scikit-learn style estimators and the fit-then-bootstrap workflow."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_returns
from .inference import CovEstimate, bootstrap_cov
from .model import CaviarParams, var_path
from .objective import LossConfig, model_loss
from .optimize import GaConfig, GdConfig, Trace, ga_optimize, gd_optimize, init_from_qr, linear_qr
from .optimize.starts import screen_starts

__all__ = ["FitResult", "LinearQuantileRegressor", "MQCaviar", "fit_model", "significance_stars"]

STAR_CUTOFFS = ((2.576, "***"), (1.96, "**"), (1.645, "*"))


def significance_stars(estimate, se):
    """Two-sided normal-approximation stars at 10%, 5% and 1%."""
    if not (np.isfinite(se) and se > 0):
        return ""
    z = abs(estimate) / se
    for cutoff, stars in STAR_CUTOFFS:
        if z >= cutoff:
            return stars
    return ""


@dataclass(frozen=True, eq=False)
class FitResult:
    params: CaviarParams
    loss: float
    trace: Trace
    cov: CovEstimate = None
    optimizer: str = "gd"

    @property
    def standard_errors(self):
        if self.cov is None:
            return np.full(self.params.to_vector().size, np.nan)
        return self.cov.standard_errors

    @property
    def stars(self):
        return tuple(significance_stars(b, s) for b, s in zip(self.params.to_vector(), self.standard_errors))


def fit_model(
    panel,
    k,
    optimizer="gd",
    gd_config=None,
    ga_config=None,
    n_bootstrap=200,
    block_len=None,
    refit_max_iter=50,
    seed=0,
    n_jobs=1,
    n_starts=4,
    n_candidates=100,
    record_time=True,
):
    """Estimate one quantile level and, when ``n_bootstrap > 0``, its
    bootstrap covariance.

    GD runs from the intercept-only quantile regression start (A = B = 0)
    and from the ``n_starts - 1`` best of ``n_candidates`` random stable
    starts; the run with the lowest exact full-sample loss wins and its
    trace is kept. Bootstrap refits always use GD, warm-started at the
    point estimate.
    """
    Y, _ = check_returns(panel, min_samples=3)
    gd_config = gd_config or GdConfig(seed=seed)
    if optimizer == "gd":
        starts = screen_starts(Y, k, init_from_qr(Y, k), int(n_candidates), int(n_starts), seed)
        best = None
        for start in starts:
            params, trace = gd_optimize(Y, start, gd_config, record_time=record_time)
            loss = model_loss(params, Y, LossConfig(k))
            if best is None or loss < best[0]:
                best = (loss, params, trace)
        _, params, trace = best
    elif optimizer == "ga":
        ga_config = ga_config or GaConfig(seed=seed)
        params, trace = ga_optimize(Y, ga_config, k, record_time=record_time)
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}; expected 'gd' or 'ga'")
    loss = model_loss(params, Y, LossConfig(k))
    cov = None
    if n_bootstrap:
        cov = bootstrap_cov(
            Y,
            params,
            gd_config,
            replicates=n_bootstrap,
            block_len=block_len,
            seed=seed,
            n_jobs=n_jobs,
            refit_max_iter=refit_max_iter,
        )
    return FitResult(params, loss, trace, cov, optimizer)


class MQCaviar(BaseEstimator):
    """Multivariate CAViaR quantile model.

    Parameters
    ----------
    k : float, default=0.01
        Quantile level.
    optimizer : {"gd", "ga"}, default="gd"
    learning_rate, max_iter, patience, split, bandwidth, metric :
        Gradient-descent settings, see :class:`GdConfig`.
    population, generations, bits, lo, hi, crossover_rate, mutation_rate, elite :
        Genetic-algorithm settings, see :class:`GaConfig`.
    n_bootstrap : int, default=0
        Bootstrap replicates for the covariance; 0 skips it.
    block_len : int, optional
        Bootstrap block length, ``ceil(T ** (1/3))`` by default.
    random_state : int, default=0
    n_jobs : int, default=1

    Attributes
    ----------
    params_ : CaviarParams
    loss_ : float
        Exact in-sample loss.
    trace_ : Trace
    cov_ : CovEstimate or None
    q0_ : ndarray of shape (n_markets,)
        Initial quantile used for the in-sample path.
    """

    def __init__(
        self,
        k=0.01,
        optimizer="gd",
        learning_rate=1.0,
        max_iter=200,
        patience=10,
        split=0.8,
        bandwidth=None,
        metric="sensitivity",
        population=500,
        generations=1000,
        bits=16,
        lo=-3.0,
        hi=3.0,
        crossover_rate=0.9,
        mutation_rate=None,
        elite=2,
        n_bootstrap=0,
        block_len=None,
        random_state=0,
        n_jobs=1,
    ):
        self.k = k
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.patience = patience
        self.split = split
        self.bandwidth = bandwidth
        self.metric = metric
        self.population = population
        self.generations = generations
        self.bits = bits
        self.lo = lo
        self.hi = hi
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.elite = elite
        self.n_bootstrap = n_bootstrap
        self.block_len = block_len
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _gd_config(self):
        return GdConfig(
            learning_rate=self.learning_rate,
            max_iter=self.max_iter,
            patience=self.patience,
            split=self.split,
            h=self.bandwidth,
            seed=self.random_state,
            metric=self.metric,
        )

    def _ga_config(self):
        return GaConfig(
            population=self.population,
            generations=self.generations,
            bits=self.bits,
            lo=self.lo,
            hi=self.hi,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            elite=self.elite,
            seed=self.random_state,
        )

    def fit(self, Y, y=None):
        """Fit on a (T, n_markets) return matrix. ``y`` is ignored."""
        Y, markets = check_returns(Y, min_samples=3)
        result = fit_model(
            Y,
            self.k,
            optimizer=self.optimizer,
            gd_config=self._gd_config(),
            ga_config=self._ga_config(),
            n_bootstrap=self.n_bootstrap,
            block_len=self.block_len,
            seed=self.random_state,
            n_jobs=self.n_jobs,
        )
        self.result_ = result
        self.params_ = result.params
        self.loss_ = result.loss
        self.trace_ = result.trace
        self.cov_ = result.cov
        self.q0_ = np.quantile(Y, self.k, axis=0)
        self.n_features_in_ = Y.shape[1]
        self.markets_ = markets
        return self

    def predict(self, Y):
        """Conditional k-quantile path over ``Y``, started at ``q0_``."""
        check_is_fitted(self, "params_")
        Y, _ = check_returns(Y, min_samples=1)
        if Y.shape[1] != self.n_features_in_:
            raise ValueError(f"fitted on {self.n_features_in_} markets, got {Y.shape[1]}")
        return var_path(self.params_, Y, self.q0_).q

    def score(self, Y, y=None):
        """Negative exact pinball loss (higher is better)."""
        check_is_fitted(self, "params_")
        Y, _ = check_returns(Y, min_samples=1)
        return -model_loss(self.params_, Y, LossConfig(self.k), q0=self.q0_)

    def violation_rate(self, Y):
        """Per-market share of returns below the predicted quantile."""
        Y, _ = check_returns(Y, min_samples=1)
        return np.mean(Y < self.predict(Y), axis=0)


class LinearQuantileRegressor(RegressorMixin, BaseEstimator):
    """Linear conditional-quantile regression.

    Parameters
    ----------
    quantile : float, default=0.5
    fit_intercept : bool, default=True
    """

    def __init__(self, quantile=0.5, fit_intercept=True):
        self.quantile = quantile
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        design = np.column_stack([np.ones(len(X)), X]) if self.fit_intercept else X
        beta = linear_qr(design, y, self.quantile)
        if self.fit_intercept:
            self.intercept_, self.coef_ = float(beta[0]), beta[1:]
        else:
            self.intercept_, self.coef_ = 0.0, beta
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_ + self.intercept_
