"""Compiled inner loops for the quantile recursion and its loss.

Parameter vectors are flat, ordered ``c (n), A row-major (n*n), B row-major (n*n)``.
"""

import numpy as np
from numba import config, njit, prange

# the bundled TBB is often too old; prefer OpenMP, then the portable workqueue
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

DIVERGENCE_BOUND = 1e6


@njit(cache=True)
def n_params(n):
    return n + 2 * n * n


@njit(cache=True)
def path_kernel(theta, y, q0, out):
    """Fill ``out`` with the quantile path; return the 0-based row that
    exceeded the divergence bound, or -1."""
    T, n = y.shape
    for i in range(n):
        out[0, i] = q0[i]
    for t in range(1, T):
        for i in range(n):
            v = theta[i]
            for j in range(n):
                v += theta[n + i * n + j] * abs(y[t - 1, j])
                v += theta[n + n * n + i * n + j] * out[t - 1, j]
            if not abs(v) <= DIVERGENCE_BOUND:
                return t
            out[t, i] = v
    return -1


@njit(cache=True)
def _softplus(x):
    if x > 0.0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@njit(cache=True)
def _kernel_value(k, u, h):
    if h > 0.0:
        return k * u + h * _softplus(-u / h)
    if u < 0.0:
        return (k - 1.0) * u
    return k * u


@njit(cache=True)
def _kernel_slope(k, u, h):
    # k - 1 / (1 + exp(u / h)), written to avoid overflow
    z = u / h
    if z >= 0.0:
        e = np.exp(-z)
        return k - e / (1.0 + e)
    return k - 1.0 / (1.0 + np.exp(z))


@njit(cache=True)
def loss_kernel(theta, y, q0, k, h, w, lo, hi):
    """Weighted sum over markets of the mean pinball loss over rows
    ``lo <= t < hi`` of the full path; inf on divergence."""
    T, n = y.shape
    q = q0.copy()
    qn = np.empty(n)
    acc = np.zeros(n)
    if lo == 0:
        for i in range(n):
            acc[i] += _kernel_value(k, y[0, i] - q[i], h)
    for t in range(1, hi):
        for i in range(n):
            v = theta[i]
            for j in range(n):
                v += theta[n + i * n + j] * abs(y[t - 1, j])
                v += theta[n + n * n + i * n + j] * q[j]
            if not abs(v) <= DIVERGENCE_BOUND:
                return np.inf
            qn[i] = v
        for i in range(n):
            q[i] = qn[i]
            if t >= lo:
                acc[i] += _kernel_value(k, y[t, i] - q[i], h)
    total = 0.0
    for i in range(n):
        total += w[i] * acc[i] / (hi - lo)
    return total


@njit(cache=True, parallel=True)
def batch_loss_kernel(thetas, y, q0, k, h, w):
    m = thetas.shape[0]
    T = y.shape[0]
    out = np.empty(m)
    for r in prange(m):
        out[r] = loss_kernel(thetas[r], y, q0, k, h, w, 0, T)
    return out


@njit(cache=True)
def grad_kernel(theta, y, q0, k, h, w, grad):
    """Smoothed loss and its exact gradient by forward sensitivities.

    ``S[i, :]`` holds d q_t[i] / d theta and obeys S_t = D_t + B S_{t-1}.
    Returns the loss, or inf when the path diverges (``grad`` is then garbage).
    """
    T, n = y.shape
    p = n + 2 * n * n
    oa = n
    ob = n + n * n
    q = q0.copy()
    qn = np.empty(n)
    S = np.zeros((n, p))
    Sn = np.zeros((n, p))
    for a in range(p):
        grad[a] = 0.0
    loss = 0.0
    for i in range(n):
        u = y[0, i] - q[i]
        loss += w[i] * _kernel_value(k, u, h)
    for t in range(1, T):
        for i in range(n):
            v = theta[i]
            for j in range(n):
                v += theta[oa + i * n + j] * abs(y[t - 1, j])
                v += theta[ob + i * n + j] * q[j]
            if not abs(v) <= DIVERGENCE_BOUND:
                return np.inf
            qn[i] = v
            for a in range(p):
                s = 0.0
                for j in range(n):
                    s += theta[ob + i * n + j] * S[j, a]
                Sn[i, a] = s
            Sn[i, i] += 1.0
            for j in range(n):
                Sn[i, oa + i * n + j] += abs(y[t - 1, j])
                Sn[i, ob + i * n + j] += q[j]
        for i in range(n):
            q[i] = qn[i]
            u = y[t, i] - q[i]
            loss += w[i] * _kernel_value(k, u, h)
            g = w[i] * _kernel_slope(k, u, h)
            for a in range(p):
                S[i, a] = Sn[i, a]
                grad[a] -= g * S[i, a]
    for a in range(p):
        grad[a] /= T
    return loss / T



@njit(cache=True)
def grad_gram_kernel(theta, y, q0, k, h, w, grad, resid, gram):
    """``grad_kernel`` plus the residuals and per-market sensitivity Gram
    matrices ``gram[i] = mean_t S_t[i]^T S_t[i]`` in the same pass."""
    T, n = y.shape
    p = n + 2 * n * n
    oa = n
    ob = n + n * n
    q = q0.copy()
    qn = np.empty(n)
    S = np.zeros((n, p))
    Sn = np.zeros((n, p))
    for a in range(p):
        grad[a] = 0.0
    for i in range(n):
        for a in range(p):
            for b in range(p):
                gram[i, a, b] = 0.0
    loss = 0.0
    for i in range(n):
        u = y[0, i] - q[i]
        resid[0, i] = u
        loss += w[i] * _kernel_value(k, u, h)
    for t in range(1, T):
        for i in range(n):
            v = theta[i]
            for j in range(n):
                v += theta[oa + i * n + j] * abs(y[t - 1, j])
                v += theta[ob + i * n + j] * q[j]
            if not abs(v) <= DIVERGENCE_BOUND:
                return np.inf
            qn[i] = v
            for a in range(p):
                s = 0.0
                for j in range(n):
                    s += theta[ob + i * n + j] * S[j, a]
                Sn[i, a] = s
            Sn[i, i] += 1.0
            for j in range(n):
                Sn[i, oa + i * n + j] += abs(y[t - 1, j])
                Sn[i, ob + i * n + j] += q[j]
        for i in range(n):
            q[i] = qn[i]
            u = y[t, i] - q[i]
            resid[t, i] = u
            loss += w[i] * _kernel_value(k, u, h)
            g = w[i] * _kernel_slope(k, u, h)
            for a in range(p):
                S[i, a] = Sn[i, a]
                grad[a] -= g * S[i, a]
            for a in range(p):
                sa = S[i, a]
                if sa != 0.0:
                    for b in range(p):
                        gram[i, a, b] += sa * S[i, b]
    for a in range(p):
        grad[a] /= T
    for i in range(n):
        for a in range(p):
            for b in range(p):
                gram[i, a, b] /= T
    return loss / T


@njit(cache=True)
def simulate_kernel(theta, eps, scale_inv, q1, y, q):
    """Location-scale recursion ``y_t = q_t * scale_inv * eps_t``.

    Returns ``(t, i)`` of the first quantile with the wrong sign for the DGP
    (``q * scale_inv <= 0``), of the first divergent value, or ``(-1, -1)``.
    """
    T, n = eps.shape
    for i in range(n):
        q[0, i] = q1[i]
    for t in range(T):
        if t > 0:
            for i in range(n):
                v = theta[i]
                for j in range(n):
                    v += theta[n + i * n + j] * abs(y[t - 1, j])
                    v += theta[n + n * n + i * n + j] * q[t - 1, j]
                q[t, i] = v
                if not abs(v) <= DIVERGENCE_BOUND:
                    return t, i
        for i in range(n):
            s = q[t, i] * scale_inv
            if not s > 0.0:
                return t, i
            y[t, i] = s * eps[t, i]
    return -1, -1
