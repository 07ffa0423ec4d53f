"""Flat ``key = value`` run configuration.

One setting per line; ``#`` starts a comment; blank lines are ignored.
Values are parsed according to the key's type in :data:`DEFAULTS`.
Lists are comma separated; matrices separate rows with ``;``.
Precedence, lowest first: built-in defaults, the config file, then
``--set`` and dedicated command-line flags.

Keys
----
inputs : list of price CSV paths (``date,value``); market = file stem.
    Empty means the manifest written by ``simulate`` under ``out/data``.
pairs : list of ``first:second`` market names. Empty pairs every market
    with the last one, which plays the role of market 2.
levels : list of quantile levels in (0, 1).
optimizer : ``gd`` or ``ga``.
gd.learning_rate, gd.max_iter, gd.patience, gd.split, gd.starts,
gd.candidates : gradient-descent settings.
ga.population, ga.generations, ga.bits, ga.lo, ga.hi : GA settings.
bootstrap.replicates, bootstrap.block_len, bootstrap.refit_max_iter :
    covariance settings; ``block_len = 0`` picks ceil(T^(1/3)).
alpha : test size.
irf.horizon, irf.shock : response horizon and return shock; ``shock = 0``
    uses minus three standard deviations of the shocked market.
alert.window, alert.m : trailing median window and severity multiple.
adf.lags : lagged differences in the unit-root regression.
seed, jobs, out : master seed, worker cap and output directory.
simulate.* : synthetic panel (T, n, k, c, A, B, innovation, markets).
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ValidationError

__all__ = ["DEFAULTS", "RunConfig", "load_config", "parse_config_text"]


def _list(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _floats(text):
    return tuple(float(s) for s in _list(text))


def _matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    return tuple(_floats(r) for r in rows)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {
    "inputs": _list,
    "pairs": _list,
    "levels": _floats,
    "optimizer": str.strip,
    "gd.learning_rate": float,
    "gd.max_iter": int,
    "gd.patience": int,
    "gd.split": float,
    "gd.starts": int,
    "gd.candidates": int,
    "ga.population": int,
    "ga.generations": int,
    "ga.bits": int,
    "ga.lo": float,
    "ga.hi": float,
    "bootstrap.replicates": int,
    "bootstrap.block_len": int,
    "bootstrap.refit_max_iter": int,
    "alpha": float,
    "irf.horizon": int,
    "irf.shock": float,
    "alert.window": int,
    "alert.m": float,
    "adf.lags": int,
    "seed": int,
    "jobs": int,
    "out": str.strip,
    "timing": _bool,
    "simulate.T": int,
    "simulate.n": int,
    "simulate.k": float,
    "simulate.c": _floats,
    "simulate.A": _matrix,
    "simulate.B": _matrix,
    "simulate.innovation": str.strip,
    "simulate.markets": _list,
}

DEFAULTS = {
    "inputs": (),
    "pairs": (),
    "levels": (0.01,),
    "optimizer": "gd",
    "gd.learning_rate": 1.0,
    "gd.max_iter": 200,
    "gd.patience": 10,
    "gd.split": 0.8,
    "gd.starts": 4,
    "gd.candidates": 100,
    "ga.population": 500,
    "ga.generations": 1000,
    "ga.bits": 16,
    "ga.lo": -3.0,
    "ga.hi": 3.0,
    "bootstrap.replicates": 200,
    "bootstrap.block_len": 0,
    "bootstrap.refit_max_iter": 50,
    "alpha": 0.05,
    "irf.horizon": 50,
    "irf.shock": 0.0,
    "alert.window": 60,
    "alert.m": 1.5,
    "adf.lags": 0,
    "seed": 0,
    "jobs": 1,
    "out": "out",
    "timing": False,
    "simulate.T": 2207,
    "simulate.n": 4,
    "simulate.k": 0.05,
    "simulate.c": (),
    "simulate.A": (),
    "simulate.B": (),
    "simulate.innovation": "normal",
    "simulate.markets": (),
}


def parse_value(key, text, path=None, line=None):
    if key not in _PARSERS:
        raise ParseError(f"unknown key {key!r}", path, line)
    try:
        return _PARSERS[key](text)
    except ValueError as exc:
        raise ParseError(f"bad value for {key}: {exc}", path, line) from None


def parse_config_text(text, path=None):
    """Parse config text into a dict of typed overrides."""
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", path, line_no)
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, value, path, line_no)
    return out


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config_text(text, path)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one CLI invocation."""

    values: dict

    @classmethod
    def build(cls, file_values=None, overrides=None):
        values = dict(DEFAULTS)
        values.update(file_values or {})
        values.update(overrides or {})
        cfg = cls(values)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    @property
    def out(self):
        return Path(self.values["out"])

    def validate(self):
        v = self.values
        for k in v["levels"]:
            if not 0.0 < k < 1.0:
                raise ValidationError(f"quantile level {k} outside (0, 1)")
        if not v["levels"]:
            raise ValidationError("at least one quantile level is required")
        if v["optimizer"] not in ("gd", "ga"):
            raise ValidationError(f"optimizer must be 'gd' or 'ga', got {v['optimizer']!r}")
        if not 0.0 < v["alpha"] < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if v["jobs"] == 0 or v["jobs"] < -1:
            raise ValidationError("jobs must be a positive integer or -1")
        if v["seed"] < 0:
            raise ValidationError("seed must be non-negative")
        for pair in v["pairs"]:
            if pair.count(":") != 1:
                raise ValidationError(f"pair {pair!r} must look like 'first:second'")

    def pairs(self, markets):
        """Resolve configured pairs to ``(i, j)`` index tuples into ``markets``."""
        markets = list(markets)
        if len(markets) < 2:
            raise ValidationError("spillover commands need at least two markets")
        if not self.values["pairs"]:
            last = len(markets) - 1
            return [(i, last) for i in range(last)]
        out = []
        for pair in self.values["pairs"]:
            a, b = pair.split(":")
            for name in (a, b):
                if name not in markets:
                    raise ValidationError(f"pair {pair!r} names unknown market {name!r}; known: {', '.join(markets)}")
            if a == b:
                raise ValidationError(f"pair {pair!r} repeats a market")
            out.append((markets.index(a), markets.index(b)))
        return out

    def sim_params(self):
        """Simulation parameters; unspecified pieces default to own-market
        persistence and a one-way quantile spillover from the last market."""
        from .model import CaviarParams

        v = self.values
        n = v["simulate.n"]
        if n < 1:
            raise ValidationError("simulate.n must be >= 1")
        c = np.array(v["simulate.c"]) if v["simulate.c"] else np.full(n, -0.2)
        A = np.array(v["simulate.A"]) if v["simulate.A"] else -0.15 * np.eye(n)
        if v["simulate.B"]:
            B = np.array(v["simulate.B"])
        else:
            B = 0.8 * np.eye(n)
            B[: n - 1, n - 1] += 0.1
        try:
            return CaviarParams(v["simulate.k"], c, A, B)
        except ValueError as exc:
            raise ValidationError(f"simulate parameters: {exc}") from None

