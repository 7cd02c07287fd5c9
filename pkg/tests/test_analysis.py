import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from casimir_grating.analysis import (BinSchedule, MeasuredCurve, combine_errors, curve_rows,
                                      local_power_law, normalize_by_pfa, read_curve_csv,
                                      rolling_weighted_average, scaling_transform, weighted_mean)
from casimir_grating.lifshitz import lifshitz_pressure
from casimir_grating.materials import Environment, MaterialModel
from casimir_grating.modal import GratingGeometry
from casimir_grating.numerics import NumericsConfig
from casimir_grating.pfa import pfa_pressure


def curve(d, p, err=None, sys=None):
    d = np.asarray(d, dtype=float)
    err = np.ones_like(d) if err is None else err
    sys = np.zeros_like(d) if sys is None else sys
    return MeasuredCurve(d, p, err, sys)


def power_law(n, d=None):
    d = np.linspace(200.0, 2000.0, 19) if d is None else d
    return curve(d, -3.0 * d**-n, 1e-3 * d**-n)


# rolling average

def test_golden_window():
    c = curve([100.0, 101.0, 102.0], [10.0, 20.0, 30.0], [1.0, 2.0, 3.0])
    out = rolling_weighted_average(c, BinSchedule.constant(2))
    assert len(out) == 2
    assert out.pressure[0] == 12.0
    assert out.random_error[0] == 1.25**-0.5
    assert out.random_error[0] == pytest.approx(0.894, abs=5e-4)
    assert out.d[0] == 100.5


def test_equal_errors_give_plain_mean():
    p = [3.0, 7.0, 11.0, 2.0]
    out = rolling_weighted_average(curve([1.0, 2.0, 3.0, 4.0], p, [0.5] * 4), BinSchedule.constant(4))
    assert out.pressure[0] == pytest.approx(np.mean(p), rel=1e-15)
    assert out.random_error[0] == pytest.approx(0.25, rel=1e-15)


def test_window_of_one_is_identity():
    c = MeasuredCurve([1.0, 2.0, 5.0], [4.0, -1.0, 2.0], [0.1, 0.2, 0.3], [0.5, 0.5, 0.6])
    out = rolling_weighted_average(c, BinSchedule.constant(1))
    for name in ("d", "pressure", "random_error", "systematic_error"):
        np.testing.assert_array_equal(getattr(out, name), getattr(c, name))
    np.testing.assert_array_equal(out.distance_error, 0.0)


def test_distance_error_and_systematic_channel():
    c = MeasuredCurve([100.0, 102.0, 104.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.2, 0.4, 0.6])
    out = rolling_weighted_average(c, BinSchedule.constant(3))
    assert out.distance_error[0] == pytest.approx(np.std([100.0, 102.0, 104.0]), rel=1e-15)
    assert out.systematic_error[0] == pytest.approx(0.4, rel=1e-15)


def test_zero_error_rejected():
    c = curve([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [1.0, 0.0, 1.0])
    with pytest.raises(ValueError, match="zero random error"):
        rolling_weighted_average(c, BinSchedule.constant(2))
    with pytest.raises(ValueError):
        weighted_mean([1.0], [0.0])


def test_too_few_points():
    with pytest.raises(ValueError, match="not enough points"):
        rolling_weighted_average(curve([1.0, 2.0], [1.0, 2.0]), BinSchedule.constant(3))


def test_schedule_values():
    s = BinSchedule()
    assert (s.n_at(250.0), s.n_at(300.0), s.n_at(650.0), s.n_at(1000.0), s.n_at(1500.0)) == (10, 10, 23, 35, 35)
    # 300 + 700 * 0.5 / 25 = 314: n = 10.5 rounds half up
    assert s.n_at(314.0) == 11


def test_schedule_validation():
    with pytest.raises(ValueError):
        BinSchedule(12, 10)
    with pytest.raises(ValueError):
        BinSchedule(10, 35, 1000.0, 300.0)


def test_schedule_windows_on_dense_data():
    d = np.arange(200.0, 1200.0, 2.0)
    out = rolling_weighted_average(curve(d, -1e3 * d**-4, 1e-3 * np.ones_like(d)))
    assert np.all(np.diff(out.d) > 0)
    # last window is anchored where the 35-point window still fits
    assert out.d[-1] == pytest.approx(d[-35:].mean())


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=12), st.floats(0.1, 5.0), st.floats(-3, 3),
       st.integers(1, 3))
def test_equal_errors_commute_with_affine_map(p, a, b, n):
    p = np.array(p)
    d = np.arange(1.0, len(p) + 1.0)
    err = np.full_like(p, 0.3)
    sched = BinSchedule.constant(n)
    lhs = rolling_weighted_average(curve(d, a * p + b, err), sched).pressure
    rhs = a * rolling_weighted_average(curve(d, p, err), sched).pressure + b
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(1e-3, 10.0)), min_size=2, max_size=10),
       st.integers(1, 4))
def test_output_error_not_above_smallest_input(pts, n):
    assume(n <= len(pts))
    p, err = map(np.array, zip(*pts))
    out = rolling_weighted_average(curve(np.arange(len(p), dtype=float), p, err), BinSchedule.constant(n))
    for i, e in enumerate(out.random_error):
        assert e <= err[i:i + n].min() * (1 + 1e-12)


# curve validation

def test_curve_invariants():
    with pytest.raises(ValueError, match="strictly increasing"):
        curve([1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError, match="non-negative"):
        curve([1.0, 2.0], [1.0, 1.0], [1.0, -1.0])
    with pytest.raises(ValueError, match="same length"):
        curve([1.0, 2.0], [1.0])


# error combination

def test_combine_errors():
    assert combine_errors(0.0, 0.2) == 0.2
    assert combine_errors(0.5, 0.2) == pytest.approx(0.7, rel=1e-15)
    assert combine_errors(0.3, 0.4, "quadrature") == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError):
        combine_errors(-0.1, 0.2)
    with pytest.raises(ValueError):
        combine_errors(0.1, 0.2, "max")


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_combine_errors_symmetric(a, b):
    assert combine_errors(a, b) == combine_errors(b, a)
    assert combine_errors(a, b, "quadrature") == combine_errors(b, a, "quadrature")


# normalisation

def test_pfa_normalised_by_itself_is_one():
    g = GratingGeometry(350.0, 130.0, 400.0)
    d = np.array([200.0, 400.0, 800.0])
    p = np.array([pfa_pressure(x, g) for x in d])
    r = normalize_by_pfa(curve(d, p, 0.01 * np.abs(p)), g)
    np.testing.assert_array_equal(r.ratio, 1.0)
    np.testing.assert_allclose(r.ratio_err, 0.01, rtol=1e-14)


def test_normalisation_error_propagation():
    c = MeasuredCurve([300.0], [-2.0], [0.5], [0.2])
    r = normalize_by_pfa(c, pfa_values=[-4.0])
    assert r.ratio[0] == 0.5
    assert r.ratio_err[0] == pytest.approx(0.7 / 4.0, rel=1e-15)
    rq = normalize_by_pfa(c, pfa_values=[-4.0], error_mode="quadrature")
    assert rq.ratio_err[0] == pytest.approx(math.hypot(0.5, 0.2) / 4.0, rel=1e-15)


def test_crossover_detected_by_sign_change():
    d = np.linspace(210.0, 1010.0, 17)
    pfa = -1.0 * d**-4
    meas = pfa * (1.0 + 0.1 * (400.0 - d) / 400.0)
    r = normalize_by_pfa(curve(d, meas, 1e-3 * np.abs(pfa)), pfa_values=pfa)
    flips = np.nonzero(np.diff(np.sign(r.ratio - 1.0)))[0]
    assert len(flips) == 1 and d[flips[0]] <= 400.0 <= d[flips[0] + 1]


# scaling

def test_scaling_identity():
    c = power_law(5)
    out = scaling_transform(c, 350.0, 350.0)
    np.testing.assert_array_equal(out.d, c.d)
    np.testing.assert_array_equal(out.pressure, c.pressure)


@pytest.mark.parametrize("n", [4, 5])
def test_scaling_prefactor(n):
    p1, p2 = 350.0, 700.0
    out = scaling_transform(power_law(n), p1, p2)
    # transformed curve evaluated back on the original law at the same d
    ratio = out.pressure / (-3.0 * out.d**-n)
    np.testing.assert_allclose(ratio, (p1 / p2) ** (4 - n), rtol=1e-10)


def test_scaling_larger_for_steeper_law():
    out = scaling_transform(power_law(5), 350.0, 700.0)
    assert np.all(np.abs(out.pressure) > np.abs(-3.0 * out.d**-5))


def test_scaling_rejects_bad_period():
    with pytest.raises(ValueError):
        scaling_transform(power_law(4), 0.0, 1.0)


@given(st.floats(10.0, 1e4), st.floats(10.0, 1e4), st.floats(10.0, 1e4))
def test_scaling_group_action(a, b, c):
    base = power_law(4.5)
    two = scaling_transform(scaling_transform(base, a, b), b, c)
    one = scaling_transform(base, a, c)
    np.testing.assert_allclose(two.d, one.d, rtol=1e-13)
    np.testing.assert_allclose(two.pressure, one.pressure, rtol=1e-13)
    np.testing.assert_allclose(two.random_error, one.random_error, rtol=1e-13)


# power law

@pytest.mark.parametrize("n", [4, 5])
def test_power_law_exact(n):
    centres, exps = local_power_law(power_law(n), 5)
    np.testing.assert_allclose(exps, n, atol=1e-6)
    assert len(centres) == 15


def test_power_law_ideal_mirror_proxy():
    ideal, cold = MaterialModel.plasma(1e4), Environment(1.0)
    d = np.geomspace(1500.0, 3000.0, 5)
    num = NumericsConfig(matsubara_cap=100000)
    p = np.array([lifshitz_pressure(x, ideal, cold, num) for x in d])
    _, exps = local_power_law(curve(d, p, 1e-3 * np.abs(p)), 5)
    assert exps[0] == pytest.approx(4.0, abs=0.01)


def test_power_law_errors():
    with pytest.raises(ValueError):
        local_power_law(power_law(4), 2)
    with pytest.raises(ValueError):
        local_power_law(power_law(4, np.array([1.0, 2.0])), 3)


# csv

def test_csv_round_trip_with_offset(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa\n"
                    "200,-50.5,1.0,0.2\n210,-44.0,0.9,0.2\n")
    c = read_curve_csv(path, distance_offset=3.0)
    np.testing.assert_array_equal(c.d, [203.0, 213.0])
    np.testing.assert_allclose(c.pressure, [-0.0505, -0.044], rtol=1e-15)
    rows = curve_rows(c)
    assert list(rows[0]) == ["d_nm", "pressure_mPa", "random_err_mPa", "systematic_err_mPa"]
    assert rows[1]["pressure_mPa"] == pytest.approx(-44.0, rel=1e-15)


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("d,p\n1,2\n")
    with pytest.raises(ValueError, match="expected header"):
        read_curve_csv(path)
