import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import zeta

from casimir_grating.constants import EV_PER_NM3_TO_PA
from casimir_grating.ema import UniaxialPermittivity, _slab_operators, ema_pressure, ema_tensor
from casimir_grating.lifshitz import lifshitz_pressure
from casimir_grating.materials import Environment, MaterialModel, permittivity_imag_freq, wavenumber
from casimir_grating.modal import GratingGeometry, grating_reflection_batch
from casimir_grating.numerics import NumericsConfig
from casimir_grating.scattering import plane_grating_pressure

gold = MaterialModel()
env = Environment()
sample = GratingGeometry(350.0, 130.0, 400.0)


def test_tensor_solid_metal():
    assert ema_tensor(1.0, 7.0) == UniaxialPermittivity(7.0, 7.0, 7.0)


def test_tensor_vacuum():
    assert ema_tensor(0.0, 7.0) == UniaxialPermittivity(1.0, 1.0, 1.0)


def test_tensor_example():
    t = ema_tensor(0.5, 3.0)
    assert (t.eps_xx, t.eps_yy, t.eps_zz) == pytest.approx((1.5, 2.0, 2.0), rel=1e-15)


def test_tensor_preconditions():
    with pytest.raises(ValueError):
        ema_tensor(1.2, 3.0)
    with pytest.raises(ValueError):
        ema_tensor(0.5, 0.5)


@given(f=st.floats(0.0, 1.0), eps=st.floats(1.0, 1e8))
def test_tensor_ordering(f, eps):
    t = ema_tensor(f, eps)
    assert t.eps_yy == t.eps_zz
    assert 1.0 - 1e-12 <= t.eps_xx <= t.eps_yy * (1 + 1e-12)


@given(f1=st.floats(0.0, 1.0), f2=st.floats(0.0, 1.0), eps=st.floats(1.0, 1e6))
def test_tensor_monotone_in_filling(f1, f2, eps):
    lo, hi = sorted((f1, f2))
    a, b = ema_tensor(lo, eps), ema_tensor(hi, eps)
    assert a.eps_yy <= b.eps_yy * (1 + 1e-12)
    assert a.eps_xx <= b.eps_xx * (1 + 1e-12)


def test_single_order_modal_slab_is_the_tensor():
    # specular-only slab reflection at normal incidence sees eps_yy for TE and eps_xx for TM
    xi = 0.3
    eps = float(permittivity_imag_freq(xi, gold))
    q = float(wavenumber(xi))
    t = ema_tensor(sample.filling_factor, eps)
    thick = GratingGeometry(350.0, 130.0, 1e5)
    R = grating_reflection_batch(thick, eps, np.array([0.0]), np.array([0.0]), q, 0)[0]
    r_te = (1 - np.sqrt(t.eps_yy)) / (1 + np.sqrt(t.eps_yy))
    r_tm = (np.sqrt(t.eps_xx) - 1) / (np.sqrt(t.eps_xx) + 1)
    assert R[0, 0] == pytest.approx(r_te, rel=1e-9)
    assert R[1, 1] == pytest.approx(r_tm, rel=1e-9)
    assert abs(R[0, 1]) < 1e-12 and abs(R[1, 0]) < 1e-12


def test_static_drude_convention():
    kx, ky = np.array([0.001, 0.002]), np.array([0.0, 0.003])
    rp, Rs, _ = _slab_operators(0.0, kx, ky, sample, gold)
    assert np.all(rp[:, 0] == 0) and np.all(rp[:, 1] == 1)
    assert np.all(Rs[:, 0, 0] == 0) and np.all(Rs[:, 1, 1] == 1)


@pytest.mark.parametrize("d", [200.0, 700.0, 2000.0])
def test_full_filling_is_lifshitz(d):
    g = GratingGeometry(350.0, 350.0, 400.0)
    assert ema_pressure(d, g) == pytest.approx(lifshitz_pressure(d, gold, env), rel=1e-6)


@pytest.mark.parametrize("d", [300.0, 1500.0])
def test_zero_height_is_lifshitz(d):
    g = GratingGeometry(350.0, 130.0, 0.0)
    assert ema_pressure(d, g) == pytest.approx(lifshitz_pressure(d, gold, env), rel=1e-6)


def test_empty_slab_limit_at_zero_temperature():
    # vanishing ridge fraction leaves the bulk at d + h
    g = GratingGeometry(350.0, 1e-8, 400.0)
    n0 = NumericsConfig(zero_temperature=True)
    assert ema_pressure(300.0, g, num=n0) == pytest.approx(lifshitz_pressure(700.0, gold, env, n0), rel=2e-4)


def test_static_term_sees_slab_top_for_any_filling():
    # f eps_D is infinite at xi = 0, so thin lamellae still screen the static TM field:
    # the only difference from the bare bulk at d + h is the l = 0 term moving to d
    d, h = 300.0, 400.0
    g = GratingGeometry(350.0, 1e-8, h)
    shift = -env.thermal_energy * zeta(3) / (8 * math.pi) * (d**-3 - (d + h) ** -3) * EV_PER_NM3_TO_PA
    diff = ema_pressure(d, g) - lifshitz_pressure(d + h, gold, env)
    assert diff == pytest.approx(shift, rel=2e-3)


def test_attractive_and_monotone():
    ds = [200.0, 300.0, 500.0, 800.0, 1300.0, 2000.0, 3500.0, 5000.0]
    ps = np.array([ema_pressure(d, sample) for d in ds])
    assert np.all(ps < 0)
    assert np.all(np.diff(np.abs(ps)) < 0)


def test_bounded_by_ridge_and_trench_planes():
    for d in (300.0, 1000.0):
        p = ema_pressure(d, sample)
        assert abs(lifshitz_pressure(d + 400.0, gold, env)) < abs(p) < abs(lifshitz_pressure(d, gold, env))


def test_plasma_kind_runs():
    p = ema_pressure(800.0, sample, MaterialModel.plasma(8.39))
    assert p < ema_pressure(800.0, sample) < 0


@pytest.mark.slow
def test_large_distance_agreement_with_modal():
    d = 5000.0
    exact = plane_grating_pressure(d, sample, gold, env, NumericsConfig(), estimate_error=False,
                                   adaptive=False).pressure
    assert abs(ema_pressure(d, sample) / exact - 1) < 0.05


@pytest.mark.slow
def test_fails_at_short_distance():
    d = 300.0
    exact = plane_grating_pressure(d, sample, gold, env, NumericsConfig(), estimate_error=False,
                                   adaptive=False).pressure
    assert abs(ema_pressure(d, sample) / exact - 1) > 0.05
