"""``mqcaviar`` command-line pipeline.

Subcommands
-----------
simulate : write synthetic ``date,value`` price files under ``OUT/data``.
stats : descriptive statistics of the input returns, ``OUT/stats.csv``.
fit : per pair and level, estimate the model and its bootstrap covariance
    into ``OUT/fit/PAIR_kLEVEL/``; all estimates go to ``OUT/fit.csv``.
test : joint spillover Wald tests from the fit artifacts, ``OUT/tests.csv``.
irf : pseudo-impulse responses per shocked market plus a dominance table.
alert : rolling-median VaR alerts per pair and level.

Global flags may appear before or after the subcommand. Settings resolve
as defaults < ``--config`` file < ``--set KEY=VALUE`` < dedicated flags.
Errors go to stderr with a nonzero exit code; data goes to files.
"""

import argparse
import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import __version__
from . import io
from .config import RunConfig, load_config, parse_value
from .estimator import fit_model
from .exceptions import ExplosivePathError, MQCaviarError, OptimizerAbort, ValidationError
from .inference import spillover_suite
from .irf import compare_spillover, generate_alerts, pseudo_irf
from .model import SimConfig, simulate, var_path
from .optimize import GaConfig, GdConfig
from .panel import RawSeries, align, describe, log_returns, read_series_csv, write_series_csv

__all__ = ["build_parser", "main"]

MANIFEST = "manifest.txt"
SIM_START_PRICE = 100.0


# --------------------------------------------------------------------------
# argument handling


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="key = value config file")
    g.add_argument("--seed", metavar="U64", type=int, default=argparse.SUPPRESS, help="master seed")
    g.add_argument("--jobs", metavar="N", type=int, default=argparse.SUPPRESS, help="parallel workers (-1 = all)")
    g.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    g.add_argument(
        "--set", metavar="KEY=VALUE", action="append", default=argparse.SUPPRESS, help="override one config key"
    )
    g.add_argument(
        "--timing", action="store_true", default=argparse.SUPPRESS, help="record wall-clock millis in traces"
    )

    parser = argparse.ArgumentParser(
        prog="mqcaviar",
        description="Multivariate CAViaR estimation, spillover tests, impulse responses and VaR alerts.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"mqcaviar {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, func, text in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.set_defaults(func=func)
    return parser


def resolve_config(args):
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        overrides[key] = parse_value(key, value)
    for key in ("seed", "jobs", "out", "timing"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    return RunConfig.build(file_values, overrides)


# --------------------------------------------------------------------------
# shared helpers


def _ensure_dir(path):
    path.mkdir(parents=True, exist_ok=True)
    return path


def _input_paths(cfg):
    if cfg["inputs"]:
        return [Path(p) for p in cfg["inputs"]]
    manifest = cfg.out / "data" / MANIFEST
    if not manifest.exists():
        raise ValidationError("no inputs configured; set 'inputs' or run 'mqcaviar simulate' first")
    names = [line.strip() for line in manifest.read_text(encoding="utf-8").splitlines() if line.strip()]
    return [manifest.parent / name for name in names]


def load_panel(cfg):
    series = [read_series_csv(p) for p in _input_paths(cfg)]
    names = [s.name for s in series]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate market names among inputs: {', '.join(names)}")
    if len(series) > 1:
        series = align(series)
    return log_returns(series)


def _tasks(cfg, markets):
    """``(pair_label, level, (i, j), seed)`` in a fixed order."""
    out = []
    for a, (i, j) in enumerate(cfg.pairs(markets)):
        for b, level in enumerate(cfg["levels"]):
            seed = int(np.random.SeedSequence([cfg["seed"], a, b]).generate_state(1)[0])
            out.append((f"{markets[i]}-{markets[j]}", level, (i, j), seed))
    return out


def _task_dir(root, pair, level):
    return root / f"{pair}_k{level!r}"


def _load_fit(cfg, pair, level, need_cov=False):
    d = _task_dir(cfg.out / "fit", pair, level)
    params_file = d / "params.csv"
    if not params_file.exists():
        raise MQCaviarError(f"no fit artifacts for {pair} at level {level} in {d}; run 'mqcaviar fit' first")
    (params,) = io.read_params_csv(params_file)
    cov = None
    cov_file = d / "cov.csv"
    if cov_file.exists():
        cov = io.read_matrix_csv(cov_file)
    elif need_cov:
        raise MQCaviarError(f"{d} has no covariance; rerun 'mqcaviar fit' with bootstrap.replicates > 0")
    return SimpleNamespace(params=params, cov=cov)


def _fmt_date(d):
    return str(np.datetime64(d, "D"))


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg):
    params = cfg.sim_params()
    markets = cfg["simulate.markets"] or None
    panel, _ = simulate(SimConfig(params, cfg["simulate.T"], seed=cfg["seed"], innovation=cfg["simulate.innovation"], markets=markets))
    data = _ensure_dir(cfg.out / "data")
    dates = np.concatenate([[panel.dates[0] - np.timedelta64(1, "D")], panel.dates])
    log_prices = np.vstack([np.zeros(panel.n), np.cumsum(panel.returns, axis=0) / 100.0])
    prices = SIM_START_PRICE * np.exp(log_prices)
    names = []
    for i, name in enumerate(panel.markets):
        write_series_csv(RawSeries(name, dates, prices[:, i]), data / f"{name}.csv")
        names.append(f"{name}.csv")
    (data / MANIFEST).write_text("\n".join(names) + "\n", encoding="utf-8")
    io.write_params_csv([params], data / "true_params.csv")
    return 0


def cmd_stats(cfg):
    panel = load_panel(cfg)
    io.write_stats_csv(describe(panel, adf_lags=cfg["adf.lags"]), _ensure_dir(cfg.out) / "stats.csv")
    return 0


def cmd_fit(cfg):
    panel = load_panel(cfg)
    root = _ensure_dir(cfg.out / "fit")
    table = []
    for pair, level, (i, j), seed in _tasks(cfg, panel.markets):
        sub = panel.select([panel.markets[i], panel.markets[j]])
        d = _ensure_dir(_task_dir(root, pair, level))
        gd = GdConfig(
            learning_rate=cfg["gd.learning_rate"],
            max_iter=cfg["gd.max_iter"],
            patience=cfg["gd.patience"],
            split=cfg["gd.split"],
            seed=seed,
        )
        ga = GaConfig(
            population=cfg["ga.population"],
            generations=cfg["ga.generations"],
            bits=cfg["ga.bits"],
            lo=cfg["ga.lo"],
            hi=cfg["ga.hi"],
            seed=seed,
        )
        try:
            fit = fit_model(
                sub,
                level,
                optimizer=cfg["optimizer"],
                gd_config=gd,
                ga_config=ga,
                n_bootstrap=cfg["bootstrap.replicates"],
                block_len=cfg["bootstrap.block_len"] or None,
                refit_max_iter=cfg["bootstrap.refit_max_iter"],
                seed=seed,
                n_jobs=cfg["jobs"],
                n_starts=cfg["gd.starts"],
                n_candidates=cfg["gd.candidates"],
                record_time=cfg["timing"],
            )
        except OptimizerAbort as exc:
            if exc.trace is not None:
                io.write_trace_csv(exc.trace, d / "trace.partial.csv")
            raise MQCaviarError(f"{pair} at level {level}: {exc}; partial trace in {d / 'trace.partial.csv'}") from None
        io.write_params_csv([fit.params], d / "params.csv")
        io.write_trace_csv(fit.trace, d / "trace.csv")
        if fit.cov is not None:
            io.write_matrix_csv(fit.cov.covariance, d / "cov.csv")
            io.write_bootstrap_csv(fit.cov, d / "bootstrap.csv")
            if not fit.cov.reliable:
                print(
                    f"mqcaviar: warning: {pair} at level {level}: only {fit.cov.replicates} bootstrap replicates; "
                    "standard errors are unreliable",
                    file=sys.stderr,
                )
        table.extend(io.fit_table_rows(pair, fit))
    io.write_fit_csv(table, cfg.out / "fit.csv")
    return 0


def cmd_test(cfg):
    panel = load_panel(cfg)
    rows = []
    for pair, level, _, _ in _tasks(cfg, panel.markets):
        fit = _load_fit(cfg, pair, level, need_cov=True)
        for result in spillover_suite(fit, alpha=cfg["alpha"]):
            rows.append((f"{pair}@{level!r}", result))
    io.write_tests_csv(rows, _ensure_dir(cfg.out) / "tests.csv")
    return 0


def cmd_irf(cfg):
    panel = load_panel(cfg)
    root = _ensure_dir(cfg.out / "irf")
    dominance = []
    for pair, level, (i, j), _ in _tasks(cfg, panel.markets):
        params = _load_fit(cfg, pair, level).params
        names = (panel.markets[i], panel.markets[j])
        rho = params.spectral_radius()
        if rho >= 1.0:
            raise ExplosivePathError(
                0,
                f"{pair} at level {level}: fitted B has spectral radius {rho:.4g} >= 1, so responses never decay; "
                "refit with more iterations or a different seed, or inspect the trace",
            )
        if cfg["irf.shock"]:
            shocks = (cfg["irf.shock"], cfg["irf.shock"])
        else:
            shocks = tuple(-3.0 * float(np.std(panel.returns[:, m])) for m in (i, j))
        y0, q0 = np.zeros(2), params.c
        d = _ensure_dir(_task_dir(root, pair, level))
        for m in (0, 1):
            irf = pseudo_irf(params, y0, q0, m, shocks[m], cfg["irf.horizon"])
            io.write_irf_csv(irf, names, d / f"shock_{names[m]}.csv")
        comp = compare_spillover(params, 0, 1, shocks, cfg["irf.horizon"], y0, q0)
        dominance.append((pair, level, comp, names))
        print(f"{pair} k={level!r}: peak {comp.peak_i_to_j:.6g} ({names[0]}->{names[1]}) "
              f"vs {comp.peak_j_to_i:.6g} ({names[1]}->{names[0]})")
    io.write_dominance_csv(dominance, root / "dominance.csv")
    return 0


def cmd_alert(cfg):
    panel = load_panel(cfg)
    root = _ensure_dir(cfg.out / "alerts")
    dates = [_fmt_date(d) for d in panel.dates]
    for pair, level, (i, j), _ in _tasks(cfg, panel.markets):
        params = _load_fit(cfg, pair, level).params
        names = [panel.markets[i], panel.markets[j]]
        path = var_path(params, panel.select(names))
        alerts = generate_alerts(path, cfg["alert.window"], cfg["alert.m"], dates=dates, markets=names)
        io.write_alerts_csv(alerts, root / f"{pair}_k{level!r}.csv")
    return 0


COMMANDS = (
    ("simulate", cmd_simulate, "write a synthetic price panel"),
    ("stats", cmd_stats, "descriptive statistics of the input returns"),
    ("fit", cmd_fit, "estimate every pair and level with bootstrap standard errors"),
    ("test", cmd_test, "joint spillover tests from the fit artifacts"),
    ("irf", cmd_irf, "pseudo-impulse responses and spillover dominance"),
    ("alert", cmd_alert, "rolling-median VaR alerts"),
)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(cfg)
    except (MQCaviarError, OSError) as exc:
        print(f"mqcaviar: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
