"""CSV readers and writers for every table the pipeline emits.

Floats are written with ``repr`` so every table reads back bit-exactly;
missing values are empty fields.
"""

import csv
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .inference import WaldTestResult
from .irf import Alert
from .model import CaviarParams, n_params, param_names
from .optimize.trace import Trace, TraceRecord
from .panel import DescriptiveStats

STATS_COLUMNS = ["market", "mean", "std", "skewness", "kurtosis", "jb", "jb_pvalue", "adf", "adf_reject", "n"]
TRACE_COLUMNS = ["iter", "best_loss", "mean_loss", "val_loss", "millis"]
FIT_COLUMNS = ["pair", "level", "param", "estimate", "se", "stars"]
TEST_COLUMNS = ["model", "hypothesis", "chi2", "df", "pvalue", "decision"]
IRF_COLUMNS = ["h", "market", "delta_q"]
ALERT_COLUMNS = ["date", "market", "q", "reference", "severity"]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _opt_float(s):
    return None if s == "" else float(s)


def _opt_int(s):
    return None if s == "" else int(s)


def _write(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if columns is not None:
            writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _read(path, columns):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != columns:
            raise ParseError(f"expected header {','.join(columns)}", path, 1)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(columns):
                raise ParseError(f"expected {len(columns)} fields, got {len(row)}", path, reader.line_num)
            rows.append((reader.line_num, dict(zip(columns, row))))
    return rows


def _parse_rows(path, columns, convert):
    out = []
    for line, row in _read(path, columns):
        try:
            out.append(convert(row))
        except (ValueError, KeyError) as exc:
            raise ParseError(str(exc), path, line) from None
    return out


def write_stats_csv(stats, path):
    _write(
        path,
        STATS_COLUMNS,
        (
            (s.market, s.mean, s.std, s.skewness, s.kurtosis, s.jb_statistic, s.jb_pvalue, s.adf_statistic, s.adf_reject_at, s.sample_size)
            for s in stats
        ),
    )


def read_stats_csv(path):
    return _parse_rows(
        path,
        STATS_COLUMNS,
        lambda r: DescriptiveStats(
            r["market"],
            float(r["mean"]),
            float(r["std"]),
            float(r["skewness"]),
            float(r["kurtosis"]),
            float(r["jb"]),
            float(r["jb_pvalue"]),
            float(r["adf"]),
            _opt_float(r["adf_reject"]),
            int(r["n"]),
        ),
    )


def write_trace_csv(trace, path):
    _write(path, TRACE_COLUMNS, ((r.iteration, r.best_loss, r.mean_loss, r.val_loss, r.millis) for r in trace))


def read_trace_csv(path):
    records = _parse_rows(
        path,
        TRACE_COLUMNS,
        lambda r: TraceRecord(
            int(r["iter"]), float(r["best_loss"]), _opt_float(r["mean_loss"]), _opt_float(r["val_loss"]), _opt_float(r["millis"])
        ),
    )
    return Trace(records)


def write_params_csv(params_list, path):
    """One headerless row per parameter set: ``k, n, theta...`` in flattening order."""
    _write(path, None, ([p.k, p.n, *p.to_vector()] for p in params_list))


def read_params_csv(path):
    path = Path(path)
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                k, n = float(row[0]), int(row[1])
                theta = np.array([float(v) for v in row[2:]])
                if theta.size != n_params(n):
                    raise ValueError(f"{theta.size} values for n={n}, expected {n_params(n)}")
                out.append(CaviarParams.from_vector(k, theta, n))
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), path, line) from None
    return out


def write_matrix_csv(matrix, path):
    _write(path, None, (list(row) for row in np.atleast_2d(matrix)))


def read_matrix_csv(path):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])
        except ValueError as exc:
            raise ParseError(str(exc), path) from None


def fit_table_rows(pair, fit):
    names = param_names(fit.params.n)
    theta = fit.params.to_vector()
    se = fit.standard_errors
    for name, b, s, st in zip(names, theta, se, fit.stars):
        yield (pair, fit.params.k, name, b, None if not np.isfinite(s) else s, st)


def write_fit_csv(rows, path):
    _write(path, FIT_COLUMNS, rows)


def read_fit_csv(path):
    return _parse_rows(
        path,
        FIT_COLUMNS,
        lambda r: (r["pair"], float(r["level"]), r["param"], float(r["estimate"]), _opt_float(r["se"]), r["stars"]),
    )


def write_tests_csv(rows, path):
    """``rows`` are ``(model_label, WaldTestResult)`` pairs."""
    _write(path, TEST_COLUMNS, ((m, t.hypothesis, t.statistic, t.df, t.pvalue, t.decision) for m, t in rows))


def read_tests_csv(path):
    return _parse_rows(
        path,
        TEST_COLUMNS,
        lambda r: (
            r["model"],
            WaldTestResult(r["hypothesis"], (), float(r["chi2"]), int(r["df"]), float(r["pvalue"]), r["decision"]),
        ),
    )


def write_irf_csv(irf, markets, path):
    rows = ((h + 1, markets[i], irf.responses[h, i]) for h in range(irf.horizon) for i in range(len(markets)))
    _write(path, IRF_COLUMNS, rows)


def read_irf_csv(path):
    return _parse_rows(path, IRF_COLUMNS, lambda r: (int(r["h"]), r["market"], float(r["delta_q"])))


def write_alerts_csv(alerts, path):
    _write(path, ALERT_COLUMNS, ((a.date, a.market, a.q, a.reference, a.severity) for a in alerts))


def read_alerts_csv(path):
    return _parse_rows(
        path,
        ALERT_COLUMNS,
        lambda r: Alert(r["date"], r["market"], float(r["q"]), float(r["reference"]), float(r["severity"])),
    )


BOOTSTRAP_COLUMNS = ["replicates", "block_len", "failed", "reliable"]
DOMINANCE_COLUMNS = [
    "pair",
    "level",
    "peak_1_to_2",
    "peak_2_to_1",
    "half_life_1_to_2",
    "half_life_2_to_1",
    "dominant_peak",
    "dominant_half_life",
]


def write_bootstrap_csv(cov, path):
    _write(path, BOOTSTRAP_COLUMNS, [(cov.replicates, cov.block_len, cov.failed, cov.reliable)])


def read_bootstrap_csv(path):
    rows = _parse_rows(
        path,
        BOOTSTRAP_COLUMNS,
        lambda r: (int(r["replicates"]), int(r["block_len"]), int(r["failed"]), r["reliable"] == "true"),
    )
    if len(rows) != 1:
        raise ParseError(f"expected one data row, got {len(rows)}", path)
    return rows[0]


def write_dominance_csv(rows, path):
    """``rows`` are ``(pair, level, SpilloverComparison, names)`` with
    ``names`` the two market labels used in the direction strings."""

    def label(s, names):
        if s == "equal":
            return s
        a, b = (int(x) - 1 for x in s.split("->"))
        return f"{names[a]}->{names[b]}"

    _write(
        path,
        DOMINANCE_COLUMNS,
        (
            (
                pair,
                level,
                c.peak_i_to_j,
                c.peak_j_to_i,
                c.half_life_i_to_j,
                c.half_life_j_to_i,
                label(c.dominant_peak, names),
                label(c.dominant_half_life, names),
            )
            for pair, level, c, names in rows
        ),
    )


def read_dominance_csv(path):
    return _parse_rows(
        path,
        DOMINANCE_COLUMNS,
        lambda r: (
            r["pair"],
            float(r["level"]),
            float(r["peak_1_to_2"]),
            float(r["peak_2_to_1"]),
            _opt_int(r["half_life_1_to_2"]),
            _opt_int(r["half_life_2_to_1"]),
            r["dominant_peak"],
            r["dominant_half_life"],
        ),
    )
