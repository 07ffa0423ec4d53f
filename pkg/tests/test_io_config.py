import numpy as np
import pytest

from conftest import stable_params
from mqcaviar import CaviarParams, compare_spillover, describe, wald_test
from mqcaviar import io as mio
from mqcaviar.config import DEFAULTS, RunConfig, load_config, parse_config_text
from mqcaviar.exceptions import ParseError, ValidationError
from mqcaviar.inference import CovEstimate
from mqcaviar.irf import Alert, pseudo_irf
from mqcaviar.optimize import Trace
from mqcaviar.panel import RawSeries, ReturnPanel, read_series_csv, write_series_csv

# ---------------------------------------------------------------- CSV round trips


def test_series_round_trip(tmp_path):
    s = RawSeries("spx", ["2001-01-02", "2001-01-03", "2001-01-05"], [100.0, 101.25, 1 / 3])
    path = tmp_path / "spx.csv"
    write_series_csv(s, path)
    back = read_series_csv(path)
    assert back.name == "spx"
    assert list(map(str, back.dates)) == list(map(str, s.dates))
    assert np.array_equal(back.values, s.values)


@pytest.mark.parametrize(
    "body, line",
    [
        ("date,value\n2001-01-02,100\n2001-01-03,abc\n", 3),
        ("date,value\n2001-01-02,100\n2001-13-03,5\n", 3),
        ("date,value\n2001-01-02,100,7\n", 2),
        ("date,value\n2001-01-02,-1\n", 2),
        ("when,price\n", 1),
    ],
)
def test_series_errors_name_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ParseError) as info:
        read_series_csv(path)
    assert info.value.line == line
    assert f"bad.csv:{line}" in str(info.value)


def test_series_duplicate_dates(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("date,value\n2001-01-02,100\n2001-01-02,101\n")
    with pytest.raises(ParseError):
        read_series_csv(path)


def test_stats_round_trip(tmp_path, rng):
    y = rng.normal(size=(300, 2))
    stats = describe(ReturnPanel(np.arange(300).astype("datetime64[D]"), ("a", "b"), y))
    path = tmp_path / "stats.csv"
    mio.write_stats_csv(stats, path)
    assert mio.read_stats_csv(path) == list(stats)


def test_trace_round_trip(tmp_path):
    trace = Trace()
    trace.append(1.5, None, 1.7, None)
    trace.append(1 / 3, 0.5, float("inf"), 2.25)
    path = tmp_path / "trace.csv"
    mio.write_trace_csv(trace, path)
    assert mio.read_trace_csv(path) == trace


def test_params_round_trip(tmp_path, rng):
    ps = [stable_params(), CaviarParams(0.01, rng.normal(size=3), rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))]
    path = tmp_path / "params.csv"
    mio.write_params_csv(ps, path)
    assert mio.read_params_csv(path) == ps
    assert not path.read_text().startswith("k")


def test_params_wrong_length(tmp_path):
    path = tmp_path / "params.csv"
    path.write_text("0.05,2,1,2,3\n")
    with pytest.raises(ParseError) as info:
        mio.read_params_csv(path)
    assert info.value.line == 1


def test_matrix_round_trip(tmp_path, rng):
    M = rng.normal(size=(4, 4))
    path = tmp_path / "m.csv"
    mio.write_matrix_csv(M, path)
    assert np.array_equal(mio.read_matrix_csv(path), M)


def test_fit_rows_round_trip(tmp_path):
    p = stable_params()
    cov = CovEstimate(np.diag(np.linspace(0.01, 0.1, 10)), 200, 15)
    fit = type("Fit", (), {"params": p, "standard_errors": cov.standard_errors, "stars": ("***",) * 10})()
    rows = list(mio.fit_table_rows("a-b", fit))
    assert len(rows) == 10 and rows[3][2] == "a12"
    path = tmp_path / "fit.csv"
    mio.write_fit_csv(rows, path)
    assert mio.read_fit_csv(path) == rows


def test_tests_round_trip(tmp_path):
    t = wald_test([1.0, 2.0], np.eye(2), [0, 1])
    path = tmp_path / "tests.csv"
    mio.write_tests_csv([("a-b@0.01", t)], path)
    assert path.read_text().splitlines()[0] == "model,hypothesis,chi2,df,pvalue,decision"
    ((model, back),) = mio.read_tests_csv(path)
    assert model == "a-b@0.01"
    assert (back.statistic, back.df, back.pvalue, back.decision) == (t.statistic, t.df, t.pvalue, t.decision)


def test_irf_and_alerts_round_trip(tmp_path):
    p = stable_params()
    irf = pseudo_irf(p, [0.1, -0.2], p.c, 0, -2.0, 5)
    path = tmp_path / "irf.csv"
    mio.write_irf_csv(irf, ["a", "b"], path)
    rows = mio.read_irf_csv(path)
    assert len(rows) == 10 and rows[1] == (1, "b", irf.responses[0, 1])
    alerts = [Alert("2001-01-02", "a", -3.0, -1.0, 3.0)]
    path = tmp_path / "alerts.csv"
    mio.write_alerts_csv(alerts, path)
    assert mio.read_alerts_csv(path) == alerts


def test_bootstrap_and_dominance_round_trip(tmp_path):
    cov = CovEstimate(np.eye(10), 200, 14, failed=2, reliable=True)
    path = tmp_path / "b.csv"
    mio.write_bootstrap_csv(cov, path)
    assert mio.read_bootstrap_csv(path) == (200, 14, 2, True)
    A = np.array([[0.0, 0.5], [0.1, 0.0]])
    comp = compare_spillover(CaviarParams(0.05, [-0.3, -0.3], A, 0.5 * np.eye(2)), 0, 1, -1.0, 30)
    path = tmp_path / "d.csv"
    mio.write_dominance_csv([("x-y", 0.05, comp, ("x", "y"))], path)
    (row,) = mio.read_dominance_csv(path)
    assert row[0] == "x-y" and row[6] == "y->x"


def test_reader_rejects_wrong_header_and_width(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("date,market\n")
    with pytest.raises(ParseError) as info:
        mio.read_alerts_csv(path)
    assert info.value.line == 1
    path.write_text(",".join(mio.ALERT_COLUMNS) + "\nd,a,1,2\n")
    with pytest.raises(ParseError) as info:
        mio.read_alerts_csv(path)
    assert info.value.line == 2
    path.write_text(",".join(mio.ALERT_COLUMNS) + "\nd,a,x,2,3\n")
    with pytest.raises(ParseError):
        mio.read_alerts_csv(path)


# ---------------------------------------------------------------- config


def test_parse_config_types():
    text = """
    # comment
    levels = 0.01, 0.05
    optimizer = ga     # trailing
    gd.max_iter = 50
    timing = yes
    simulate.B = 0.5, 0.1; 0.0, 0.6
    pairs = a:b
    """
    vals = parse_config_text(text)
    assert vals["levels"] == (0.01, 0.05)
    assert vals["optimizer"] == "ga"
    assert vals["gd.max_iter"] == 50
    assert vals["timing"] is True
    assert vals["simulate.B"] == ((0.5, 0.1), (0.0, 0.6))
    assert vals["pairs"] == ("a:b",)


@pytest.mark.parametrize("text, line", [("levels = 0.01\nbogus = 1\n", 2), ("seed = x\n", 1), ("seed\n", 1)])
def test_parse_config_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_config_text(text, "run.cfg")
    assert info.value.line == line and "run.cfg" in str(info.value)


def test_load_config_missing(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "none.cfg")


def test_precedence():
    cfg = RunConfig.build({"seed": 5, "alpha": 0.1}, {"seed": 9})
    assert cfg["seed"] == 9 and cfg["alpha"] == 0.1
    assert cfg["levels"] == DEFAULTS["levels"] == (0.01,)


@pytest.mark.parametrize(
    "override",
    [{"levels": (1.0,)}, {"levels": ()}, {"optimizer": "sgd"}, {"alpha": 0.0}, {"jobs": 0}, {"seed": -1}, {"pairs": ("ab",)}],
)
def test_validation(override):
    with pytest.raises(ValidationError):
        RunConfig.build(None, override)


def test_pairs_resolution():
    cfg = RunConfig.build()
    assert cfg.pairs(["a", "b", "c"]) == [(0, 2), (1, 2)]
    cfg = RunConfig.build(None, {"pairs": ("c:a",)})
    assert cfg.pairs(["a", "b", "c"]) == [(2, 0)]
    with pytest.raises(ValidationError):
        RunConfig.build(None, {"pairs": ("a:z",)}).pairs(["a", "b"])
    with pytest.raises(ValidationError):
        RunConfig.build(None, {"pairs": ("a:a",)}).pairs(["a", "b"])
    with pytest.raises(ValidationError):
        cfg.pairs(["a"])


def test_sim_params_defaults():
    p = RunConfig.build(None, {"simulate.n": 3}).sim_params()
    assert p.n == 3 and p.B[0, 2] == pytest.approx(0.1) and p.B[2, 2] == 0.8
    assert p.spectral_radius() < 1
