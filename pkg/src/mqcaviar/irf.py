"""Pseudo-impulse responses of the quantile paths to a single return shock,
and rolling-median VaR alerts."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ExplosivePathError, ValidationError
from .model import DIVERGENCE_BOUND, _check_vec

__all__ = ["Alert", "IrfResult", "SpilloverComparison", "compare_spillover", "generate_alerts", "pseudo_irf"]


@dataclass(frozen=True, eq=False)
class IrfResult:
    """``responses[h - 1]`` is the shocked-minus-baseline quantile h steps
    after the shock date. ``half_life[i]`` is the first step h with
    ``|responses[h - 1, i]| < |responses[0, i]| / 2``, or None."""

    market: int
    shock: float
    horizon: int
    responses: np.ndarray
    half_life: tuple


def _half_lives(dq):
    out = []
    for i in range(dq.shape[1]):
        first = abs(dq[0, i])
        hit = np.nonzero(np.abs(dq[1:, i]) < first / 2.0)[0] if first > 0 else []
        out.append(int(hit[0]) + 2 if len(hit) else None)
    return tuple(out)


def pseudo_irf(params, baseline_y, baseline_q, j, shock, horizon):
    """Propagate a return shock to market ``j`` through the recursion.

    The baseline path starts at ``(baseline_y, baseline_q)`` and keeps
    feeding ``baseline_y`` as the return every period; the shocked path is
    identical except that market j's return on the shock date is
    ``baseline_y[j] + shock``. Since the recursion is affine, the
    difference is ``A @ d|y|`` after one step and is multiplied by ``B``
    each step thereafter.
    """
    n = params.n
    y = _check_vec(baseline_y, n, "baseline_y")
    q = _check_vec(baseline_q, n, "baseline_q")
    if not 0 <= int(j) < n:
        raise ValidationError(f"market index {j} out of range for {n} markets")
    if not np.isfinite(shock):
        raise ValidationError("shock must be finite")
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    y_shocked = y.copy()
    y_shocked[j] += shock
    dq = np.empty((horizon, n))
    qb = params.c + params.A @ np.abs(y) + params.B @ q
    qs = params.c + params.A @ np.abs(y_shocked) + params.B @ q
    absy = np.abs(y)
    for h in range(horizon):
        if h > 0:
            qb = params.c + params.A @ absy + params.B @ qb
            qs = params.c + params.A @ absy + params.B @ qs
        d = qs - qb
        if not np.all(np.abs(d) <= DIVERGENCE_BOUND):
            raise ExplosivePathError(h + 1, f"impulse response diverged at step {h + 1}")
        dq[h] = d
    return IrfResult(int(j), float(shock), horizon, dq, _half_lives(dq))


@dataclass(frozen=True)
class SpilloverComparison:
    """Cross-market responses in both directions between markets i and j.

    ``peak_i_to_j`` is the largest |response| of market j to a shock in
    market i; ``dominant_*`` names the direction with the larger value, or
    ``"equal"``.
    """

    i: int
    j: int
    peak_i_to_j: float
    peak_j_to_i: float
    half_life_i_to_j: int | None
    half_life_j_to_i: int | None
    dominant_peak: str
    dominant_half_life: str


def _dominance(x_ij, x_ji, i, j, tol=1e-12):
    if x_ij is None and x_ji is None:
        return "equal"
    if x_ij is None:
        return f"{i + 1}->{j + 1}"
    if x_ji is None:
        return f"{j + 1}->{i + 1}"
    if abs(x_ij - x_ji) <= tol * max(abs(x_ij), abs(x_ji), 1.0):
        return "equal"
    return f"{i + 1}->{j + 1}" if x_ij > x_ji else f"{j + 1}->{i + 1}"


def compare_spillover(params, i, j, shock, horizon, baseline_y=None, baseline_q=None):
    """Shock each of markets i and j and compare the cross responses.

    ``shock`` is one value for both directions or a pair ``(shock to i,
    shock to j)``. A missing half-life (no decay within the horizon) counts
    as the longer duration. Baselines default to zero returns and the
    intercepts.
    """
    i, j = int(i), int(j)
    shock_i, shock_j = np.broadcast_to(np.asarray(shock, dtype=float), (2,))
    if i == j:
        raise ValidationError("need two distinct markets")
    y = np.zeros(params.n) if baseline_y is None else baseline_y
    q = params.c if baseline_q is None else baseline_q
    into_j = pseudo_irf(params, y, q, i, shock_i, horizon)
    into_i = pseudo_irf(params, y, q, j, shock_j, horizon)
    peak_ij = float(np.max(np.abs(into_j.responses[:, j])))
    peak_ji = float(np.max(np.abs(into_i.responses[:, i])))
    hl_ij = into_j.half_life[j]
    hl_ji = into_i.half_life[i]
    return SpilloverComparison(
        i=i,
        j=j,
        peak_i_to_j=peak_ij,
        peak_j_to_i=peak_ji,
        half_life_i_to_j=hl_ij,
        half_life_j_to_i=hl_ji,
        dominant_peak=_dominance(peak_ij, peak_ji, i, j),
        dominant_half_life=_dominance(hl_ij, hl_ji, i, j) if (hl_ij, hl_ji) != (None, None) else "equal",
    )


@dataclass(frozen=True)
class Alert:
    date: object
    market: str
    q: float
    reference: float
    severity: float


def generate_alerts(var_path, window=60, m=1.5, dates=None, markets=None):
    """Flag days whose VaR is at least ``m`` times the median of the
    previous ``window`` days (both negative).

    Parameters
    ----------
    var_path : VarPath or array of shape (T, n)
    window : int
        Trailing window length, at least 5.
    m : float
        Severity threshold, greater than 1.
    dates, markets : sequences, optional
        Labels for rows and columns; default to row index and ``m1..mn``.

    Returns
    -------
    list of Alert, sorted by date then market.
    """
    q = np.asarray(getattr(var_path, "q", var_path), dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    window = int(window)
    if window < 5:
        raise ValidationError("window must be >= 5")
    if not m > 1:
        raise ValidationError("threshold m must exceed 1")
    T, n = q.shape
    dates = list(range(T)) if dates is None else list(dates)
    markets = [f"m{i + 1}" for i in range(n)] if markets is None else list(markets)
    alerts = []
    if T <= window:
        return alerts
    windows = np.lib.stride_tricks.sliding_window_view(q[:-1], window, axis=0)  # (T - window, n, window)
    ref = np.median(windows, axis=2)
    qt = q[window:]
    hit = (qt < 0) & (ref < 0) & (qt <= m * ref)
    for r, i in zip(*np.nonzero(hit)):
        t = r + window
        alerts.append(Alert(dates[t], markets[i], float(q[t, i]), float(ref[r, i]), float(q[t, i] / ref[r, i])))
    return alerts
