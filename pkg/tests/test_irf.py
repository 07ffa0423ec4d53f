import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_stable
from mqcaviar import CaviarParams, compare_spillover, generate_alerts, pseudo_irf
from mqcaviar.exceptions import ExplosivePathError, ValidationError


def test_zero_shock_zero_response(rng):
    p = random_stable(rng)
    irf = pseudo_irf(p, rng.normal(size=2), p.c, 0, 0.0, 20)
    assert np.all(irf.responses == 0.0)


def test_no_shock_loading_no_response(rng):
    p = random_stable(rng).replace(A=np.zeros((2, 2)))
    irf = pseudo_irf(p, rng.normal(size=2), p.c, 1, -4.0, 20)
    assert np.all(irf.responses == 0.0)


def test_hand_example():
    A = np.array([[0.0, 0.1], [0.0, 0.2]])
    p = CaviarParams(0.05, [-0.1, -0.1], A, np.zeros((2, 2)))
    irf = pseudo_irf(p, [0.5, 0.0], [-1.0, -1.0], 1, -2.0, 5)
    np.testing.assert_allclose(irf.responses[0], [0.2, 0.4], atol=1e-15)
    assert np.all(irf.responses[1:] == 0.0)
    assert irf.horizon == 5 and irf.market == 1 and irf.shock == -2.0


def test_matrix_power_decay(rng):
    for _ in range(10):
        p = random_stable(rng)
        irf = pseudo_irf(p, [0.3, -0.2], p.c, int(rng.integers(2)), -3.0, 200)
        d1 = irf.responses[0]
        for h in (2, 5, 50):
            np.testing.assert_allclose(irf.responses[h - 1], np.linalg.matrix_power(p.B, h - 1) @ d1, atol=1e-13)
        assert np.linalg.norm(irf.responses[-1]) < 1e-6


def test_response_depends_on_abs_return_change():
    p = CaviarParams(0.05, [-0.2, -0.2], [[-0.2, -0.1], [-0.3, -0.2]], [[0.5, 0.1], [0.2, 0.6]])
    y = np.array([1.0, 0.0])
    # |1 + (-3)| = |1 + 1| so both shocks move |y_1| identically
    a = pseudo_irf(p, y, p.c, 0, -3.0, 30)
    b = pseudo_irf(p, y, p.c, 0, 1.0, 30)
    np.testing.assert_array_equal(a.responses, b.responses)


def test_half_life():
    p = CaviarParams(0.05, [-0.1], [[-0.5]], [[0.6]])
    irf = pseudo_irf(p, [0.0], [-1.0], 0, -1.0, 10)
    # responses -0.5, -0.3, -0.18: first below half of |-0.5| at h = 3
    assert irf.half_life == (3,)
    assert pseudo_irf(p, [0.0], [-1.0], 0, -1.0, 1).half_life == (None,)


def test_explosive_response():
    p = CaviarParams(0.05, [-0.1], [[-1.0]], [[3.0]])
    with pytest.raises(ExplosivePathError):
        pseudo_irf(p, [0.0], [-1.0], 0, -1.0, 50)


def test_irf_validation():
    p = CaviarParams.zeros(0.05, 2)
    with pytest.raises(ValidationError):
        pseudo_irf(p, [0, 0], [0, 0], 2, -1.0, 5)
    with pytest.raises(ValidationError):
        pseudo_irf(p, [0, 0], [0, 0], 0, np.nan, 5)
    with pytest.raises(ValidationError):
        pseudo_irf(p, [0, 0], [0, 0], 0, -1.0, 0)


def test_compare_symmetric():
    A = np.array([[-0.2, -0.1], [-0.1, -0.2]])
    B = np.array([[0.6, 0.2], [0.2, 0.6]])
    p = CaviarParams(0.05, [-0.3, -0.3], A, B)
    comp = compare_spillover(p, 0, 1, -2.0, 60)
    assert comp.peak_i_to_j == comp.peak_j_to_i
    assert comp.half_life_i_to_j == comp.half_life_j_to_i
    assert comp.dominant_peak == "equal" and comp.dominant_half_life == "equal"


def test_compare_one_way():
    A = np.array([[0.0, 0.5], [0.1, 0.0]])
    p = CaviarParams(0.05, [-0.3, -0.3], A, 0.5 * np.eye(2))
    comp = compare_spillover(p, 0, 1, -1.0, 30)
    assert comp.peak_j_to_i == pytest.approx(0.5)
    assert comp.peak_i_to_j == pytest.approx(0.1)
    assert comp.dominant_peak == "2->1"


def test_compare_per_direction_shocks():
    A = np.array([[0.0, 0.5], [0.1, 0.0]])
    p = CaviarParams(0.05, [-0.3, -0.3], A, 0.5 * np.eye(2))
    comp = compare_spillover(p, 0, 1, (-10.0, -1.0), 30)
    assert comp.peak_i_to_j == pytest.approx(1.0)
    assert comp.dominant_peak == "1->2"


def test_compare_short_horizon():
    A = np.array([[-0.1, -0.2], [-0.3, -0.1]])
    p = CaviarParams(0.05, [-0.3, -0.3], A, 0.5 * np.eye(2))
    comp = compare_spillover(p, 0, 1, -1.0, 1)
    assert comp.half_life_i_to_j is None and comp.half_life_j_to_i is None
    with pytest.raises(ValidationError):
        compare_spillover(p, 1, 1, -1.0, 5)


# ---------------------------------------------------------------- alerts


def test_constant_path_no_alerts():
    assert generate_alerts(np.full((200, 2), -1.3), window=20, m=1.01) == []


def test_single_spike():
    q = np.full((100, 1), -1.0)
    q[70, 0] = -5.0
    alerts = generate_alerts(q, window=20, m=1.5)
    assert len(alerts) == 1
    a = alerts[0]
    assert a.date == 70 and a.market == "m1"
    assert a.severity == pytest.approx(5.0) and a.reference == -1.0 and a.q == -5.0


def test_huge_threshold_no_alerts(rng):
    q = -np.abs(rng.normal(size=(300, 3))) - 0.1
    assert generate_alerts(q, window=10, m=1e9) == []


def test_alerts_invariants(rng):
    q = -np.exp(rng.normal(size=(400, 2)))
    alerts = generate_alerts(q, window=15, m=1.5, dates=[f"d{t:03d}" for t in range(400)], markets=["x", "y"])
    assert alerts
    assert [a.date for a in alerts] == sorted(a.date for a in alerts)
    for a in alerts:
        assert a.q < 0 and a.severity >= 1.5


@given(st.floats(1e-3, 1e3))
def test_alerts_scale_free(lam):
    q = -np.exp(np.random.default_rng(8).normal(size=(200, 2)))
    base = generate_alerts(q, window=12, m=1.4)
    scaled = generate_alerts(lam * q, window=12, m=1.4)
    assert [(a.date, a.market) for a in scaled] == [(a.date, a.market) for a in base]
    for a, b in zip(scaled, base):
        assert a.severity == pytest.approx(b.severity, rel=1e-12)


def test_alert_validation():
    with pytest.raises(ValidationError):
        generate_alerts(np.ones((10, 1)), window=4)
    with pytest.raises(ValidationError):
        generate_alerts(np.ones((10, 1)), m=1.0)
    assert generate_alerts(-np.ones((10, 1)), window=20) == []
