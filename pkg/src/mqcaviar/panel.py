"""Price-series ingestion, trading-day alignment, log returns and
descriptive statistics."""

import csv
import re
from dataclasses import dataclass
from datetime import date
from functools import reduce
from pathlib import Path

import numpy as np

from ._stats import chi2_sf
from .exceptions import AlignmentError, DegenerateDataError, DomainError, NumericalError, ParseError, ValidationError

__all__ = [
    "ADF_CRITICAL_VALUES",
    "DescriptiveStats",
    "RawSeries",
    "ReturnPanel",
    "adf_test",
    "align",
    "describe",
    "jarque_bera",
    "jb_from_moments",
    "log_returns",
    "moments",
    "parse_date",
    "read_series_csv",
    "write_series_csv",
]

# Dickey-Fuller t-ratio quantiles, constant and no trend, from 10^5 simulated
# Gaussian random walks of length 2000 (scripts/adf_critical_values.py).
ADF_CRITICAL_VALUES = {0.01: -3.4300, 0.05: -2.8601, 0.10: -2.5632}

_ISO_DATE = re.compile(r"\d{4}-\d{2}-\d{2}")


def parse_date(text):
    """Parse a strict ``YYYY-MM-DD`` date; anything else raises ``ValueError``."""
    text = text.strip()
    if not _ISO_DATE.fullmatch(text):
        raise ValueError(f"not an ISO-8601 date: {text!r}")
    return date.fromisoformat(text)


def _as_dates(dates):
    return np.asarray(dates, dtype="datetime64[D]")


@dataclass(frozen=True, eq=False)
class RawSeries:
    """A positive level series observed on strictly increasing dates."""

    name: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.ndim != 1 or dates.shape != values.shape:
            raise ValidationError(f"{self.name}: dates and values must be 1-d of equal length")
        steps = np.diff(dates).astype(np.int64)
        if np.any(steps == 0):
            dup = dates[1:][steps == 0][0]
            raise ValidationError(f"{self.name}: duplicate date {dup}")
        if np.any(steps < 0):
            raise ValidationError(f"{self.name}: dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValidationError(f"{self.name}: non-finite value")
        if np.any(values <= 0):
            raise DomainError(f"{self.name}: values must be strictly positive")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.dates)

    def __eq__(self, other):
        if not isinstance(other, RawSeries):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Date-aligned T x n matrix of percent log returns."""

    dates: np.ndarray
    markets: tuple
    returns: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        returns = np.asarray(self.returns, dtype=float)
        markets = tuple(self.markets)
        if returns.ndim != 2:
            raise ValidationError("returns must be a 2-d array")
        if returns.shape != (len(dates), len(markets)):
            raise ValidationError(
                f"returns shape {returns.shape} does not match {len(dates)} dates x {len(markets)} markets"
            )
        if len(dates) > 1 and np.any(np.diff(dates).astype(np.int64) <= 0):
            raise ValidationError("panel dates must be strictly increasing")
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns must be finite")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "markets", markets)
        object.__setattr__(self, "returns", returns)

    @property
    def T(self):
        return self.returns.shape[0]

    @property
    def n(self):
        return self.returns.shape[1]

    def select(self, markets):
        """Sub-panel with the given market labels, in the given order."""
        idx = [self.markets.index(m) for m in markets]
        return ReturnPanel(self.dates, [self.markets[i] for i in idx], self.returns[:, idx])

    def rows(self, index):
        """Sub-panel of the given rows (slice or index array)."""
        return ReturnPanel(self.dates[index], self.markets, self.returns[index])

    def __eq__(self, other):
        if not isinstance(other, ReturnPanel):
            return NotImplemented
        return (
            self.markets == other.markets
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.returns, other.returns)
        )


def read_series_csv(path, name=None):
    """Read a ``date,value`` CSV into a :class:`RawSeries`.

    The market label defaults to the file stem. Errors name the file and
    the 1-based line.
    """
    path = Path(path)
    name = name or path.stem
    dates, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "value"]:
            raise ParseError("expected header 'date,value'", path, 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path, line)
            try:
                d = parse_date(row[0])
            except ValueError as exc:
                raise ParseError(str(exc), path, line) from None
            try:
                v = float(row[1])
            except ValueError:
                raise ParseError(f"bad value {row[1]!r}", path, line) from None
            if not np.isfinite(v) or v <= 0:
                raise ParseError(f"value must be finite and positive, got {row[1]!r}", path, line)
            dates.append(d)
            values.append(v)
    try:
        return RawSeries(name, dates, values)
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def write_series_csv(series, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "value"])
        for d, v in zip(series.dates, series.values):
            writer.writerow([str(d), repr(float(v))])


def align(series_list):
    """Restrict every series to the dates present in all of them."""
    series_list = list(series_list)
    if len(series_list) < 2:
        raise ValidationError("align needs at least two series")
    common = reduce(np.intersect1d, [s.dates for s in series_list])
    if common.size == 0:
        raise AlignmentError("series have no dates in common")
    out = []
    for s in series_list:
        keep = np.isin(s.dates, common)
        out.append(RawSeries(s.name, s.dates[keep], s.values[keep]))
    return out


def log_returns(series_list):
    """Percent log returns ``100 * ln(P[t+1] / P[t])`` of aligned series.

    Each return is stamped with the date of the later price.
    """
    series_list = list(series_list)
    if not series_list:
        raise ValidationError("no series given")
    dates = series_list[0].dates
    for s in series_list[1:]:
        if not np.array_equal(s.dates, dates):
            raise ValidationError("series are not aligned; call align() first")
    if len(dates) < 2:
        raise ValidationError("need at least two observations per series")
    prices = np.column_stack([s.values for s in series_list])
    if np.any(prices <= 0):
        raise DomainError("prices must be strictly positive")
    returns = 100.0 * np.diff(np.log(prices), axis=0)
    return ReturnPanel(dates[1:], [s.name for s in series_list], returns)


@dataclass(frozen=True)
class DescriptiveStats:
    """One row of the descriptive-statistics table. Kurtosis is raw (normal = 3)."""

    market: str
    mean: float
    std: float
    skewness: float
    kurtosis: float
    jb_statistic: float
    jb_pvalue: float
    adf_statistic: float
    adf_reject_at: float | None
    sample_size: int


def moments(y):
    """Mean, population standard deviation, skewness and raw kurtosis."""
    y = np.asarray(y, dtype=float)
    mean = y.mean()
    d = y - mean
    m2 = np.mean(d**2)
    if m2 <= 0 or not np.isfinite(m2):
        raise DegenerateDataError("zero variance: skewness and kurtosis are undefined")
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2
    return mean, np.sqrt(m2), skew, kurt


def jb_from_moments(T, skewness, kurtosis):
    return T / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)


def jarque_bera(y):
    """Jarque-Bera statistic and its chi-square(2) p-value."""
    _, _, s, k = moments(y)
    jb = jb_from_moments(len(y), s, k)
    return jb, chi2_sf(jb, 2)


def _adf_stat(y, lags):
    y = np.asarray(y, dtype=float)
    dy = np.diff(y)
    m = len(dy) - lags
    cols = [np.ones(m), y[lags:-1]]
    for i in range(1, lags + 1):
        cols.append(dy[lags - i : len(dy) - i])
    X = np.column_stack(cols)
    z = dy[lags:]
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise NumericalError("ADF regression matrix is singular")
    beta = np.linalg.solve(r, q.T @ z)
    resid = z - X @ beta
    dof = m - X.shape[1]
    s2 = resid @ resid / dof
    rinv = np.linalg.solve(r, np.eye(r.shape[0]))
    var_gamma = s2 * (rinv[1] @ rinv[1])
    return beta[1] / np.sqrt(var_gamma)


def adf_test(y, lags=0, alpha=0.05):
    """Augmented Dickey-Fuller test with a constant and no trend.

    Parameters
    ----------
    y : array-like of shape (T,)
        The series under test.
    lags : int
        Number of lagged differences in the regression.
    alpha : {0.01, 0.05, 0.10}
        Significance level.

    Returns
    -------
    statistic : float
        t-ratio of the lagged level.
    reject : bool
        True when the unit-root null is rejected (series looks stationary).
    """
    if alpha not in ADF_CRITICAL_VALUES:
        raise ValidationError(f"alpha must be one of {sorted(ADF_CRITICAL_VALUES)}")
    lags = int(lags)
    if lags < 0:
        raise ValidationError("lags must be non-negative")
    if len(y) < lags + 10:
        raise ValidationError("series too short for the requested lag order")
    stat = float(_adf_stat(y, lags))
    return stat, bool(stat < ADF_CRITICAL_VALUES[alpha])


def describe(panel, adf_lags=0):
    """Descriptive statistics per market, using population moments."""
    if panel.T < 20:
        raise ValidationError("describe needs at least 20 observations per market")
    rows = []
    for i, market in enumerate(panel.markets):
        y = panel.returns[:, i]
        mean, std, skew, kurt = moments(y)
        jb, jb_p = jarque_bera(y)
        adf, _ = adf_test(y, lags=adf_lags)
        reject_at = next((a for a in sorted(ADF_CRITICAL_VALUES) if adf < ADF_CRITICAL_VALUES[a]), None)
        rows.append(
            DescriptiveStats(
                market=market,
                mean=float(mean),
                std=float(std),
                skewness=float(skew),
                kurtosis=float(kurt),
                jb_statistic=float(jb),
                jb_pvalue=jb_p,
                adf_statistic=adf,
                adf_reject_at=reject_at,
                sample_size=panel.T,
            )
        )
    return rows
