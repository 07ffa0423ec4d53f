import numpy as np

from .. import _kernels
from ..model import CaviarParams, n_params, resolve_q0


def random_starts(y, k, m, rng):
    """Draw ``m`` stable starting vectors consistent with the sample quantiles.

    Diagonal quantile persistence is drawn from [0.3, 0.95], cross terms
    and shock loadings near zero, with B shrunk to spectral radius 0.98 if
    needed, and the intercepts are set so the
    noiseless steady state matches each market's empirical k-quantile.
    """
    T, n = y.shape
    qbar = np.quantile(y, k, axis=0)
    mean_abs = np.abs(y).mean(axis=0)
    out = np.empty((m, n_params(n)))
    for r in range(m):
        B = np.diag(rng.uniform(0.3, 0.95, n)) + rng.uniform(-0.1, 0.1, (n, n)) * (1 - np.eye(n))
        rho = np.max(np.abs(np.linalg.eigvals(B)))
        if rho > 0.98:
            B *= 0.98 / rho
        A = rng.uniform(-0.3, 0.1, (n, n)) * np.where(np.eye(n, dtype=bool), 1.0, 0.3)
        c = (np.eye(n) - B) @ qbar - A @ mean_abs
        out[r] = np.concatenate([c, A.ravel(), B.ravel()])
    return out


def screen_starts(y, k, base, m, keep, seed, weights=None):
    """The ``keep`` lowest-loss vectors among ``base`` and ``m`` random draws."""
    y = np.ascontiguousarray(y, dtype=float)
    n = y.shape[1]
    rng = np.random.default_rng(seed)
    cands = np.vstack([base.to_vector()[None, :], random_starts(y, k, m, rng)])
    q0 = resolve_q0("empirical", y, k)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    loss = _kernels.batch_loss_kernel(cands, y, q0, k, 0.0, w)
    order = np.argsort(loss[1:], kind="stable")[: max(keep - 1, 0)] + 1
    chosen = [0] + [int(i) for i in order if np.isfinite(loss[i])]
    return [CaviarParams.from_vector(k, cands[i], n) for i in chosen]
