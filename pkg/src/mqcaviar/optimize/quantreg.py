"""Linear quantile regression by iteratively reweighted least squares,
finished with a search over nearby basic (interpolating) solutions."""

from itertools import combinations

import numpy as np

from ..exceptions import NumericalError, ShapeError, ValidationError

__all__ = ["check_loss", "linear_qr"]


def check_loss(beta, X, y, k):
    u = y - X @ beta
    return float(np.mean((k - (u < 0)) * u))


def _irls(X, y, k, max_iter, eps0):
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    scale = max(np.mean(np.abs(y - X @ beta)), 1e-12)
    eps = eps0 * scale
    prev = np.inf
    for _ in range(max_iter):
        u = y - X @ beta
        w = np.where(u >= 0, k, 1.0 - k) / np.maximum(np.abs(u), eps)
        Xw = X * w[:, None]
        try:
            beta = np.linalg.solve(X.T @ Xw, Xw.T @ y)
        except np.linalg.LinAlgError:
            break
        obj = check_loss(beta, X, y, k)
        if prev - obj <= 1e-14 * max(obj, 1e-300):
            eps = max(eps * 0.1, 1e-14 * scale)
        prev = obj
    return beta


def _vertex_search(beta, X, y, k, width, rounds):
    """Try every interpolating fit through p of the ``p + width`` points
    closest to the current fit; repeat from the best one."""
    T, p = X.shape
    best, best_obj = beta, check_loss(beta, X, y, k)
    m = min(T, p + width)
    for _ in range(rounds):
        near = np.argsort(np.abs(y - X @ best), kind="stable")[:m]
        improved = False
        for subset in combinations(near, p):
            idx = list(subset)
            Xs = X[idx]
            if abs(np.linalg.det(Xs)) < 1e-12:
                continue
            cand = np.linalg.solve(Xs, y[idx])
            obj = check_loss(cand, X, y, k)
            if obj < best_obj - 1e-15 * max(best_obj, 1.0):
                best, best_obj, improved = cand, obj, True
        if not improved:
            break
    return best


def linear_qr(X, y, k, max_iter=200, eps=1e-6, vertex_width=4, vertex_rounds=10):
    """Coefficients minimizing the mean check loss of ``y - X @ beta``.

    Parameters
    ----------
    X : array-like of shape (T, p)
        Design matrix; include a column of ones for an intercept.
    y : array-like of shape (T,)
    k : float
        Quantile level in (0, 1).

    Returns
    -------
    beta : ndarray of shape (p,)
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X[:, None]
    T, p = X.shape
    if y.size != T:
        raise ShapeError(f"X has {T} rows, y has {y.size}")
    if not 0.0 < k < 1.0:
        raise ValidationError("k must lie in (0, 1)")
    if T <= p:
        raise ValidationError("need more observations than regressors")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("X and y must be finite")
    if np.linalg.matrix_rank(X) < p:
        raise NumericalError("design matrix is rank deficient")
    beta = _irls(X, y, k, max_iter, eps)
    return _vertex_search(beta, X, y, k, vertex_width, vertex_rounds)
