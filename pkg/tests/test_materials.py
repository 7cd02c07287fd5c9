import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir_grating.constants import EV_PER_NM3_TO_PA, HBAR_C, K_B, ideal_mirror_pressure
from casimir_grating.materials import (Environment, MaterialKind, MaterialModel, MatsubaraGrid,
                                       matsubara_frequency, permittivity_imag_freq, wavenumber)

gold = MaterialModel()


def test_constants_codata():
    assert HBAR_C == pytest.approx(197.3269804, rel=1e-9)
    assert K_B == pytest.approx(8.617333262e-5, rel=1e-9)
    assert EV_PER_NM3_TO_PA == pytest.approx(1.602176634e8, rel=1e-12)


def test_ideal_mirror_value():
    # pi^2 hbar c / 240 d^4 at 1 um: 1.3001 mPa
    assert ideal_mirror_pressure(1000.0) == pytest.approx(-1.30013e-3, rel=1e-4)


def test_first_matsubara_frequency():
    assert matsubara_frequency(0, Environment()) == 0.0
    assert matsubara_frequency(1, Environment()) == pytest.approx(0.16243, abs=1e-4)
    assert matsubara_frequency(10, Environment()) == pytest.approx(10 * matsubara_frequency(1, Environment()),
                                                                   rel=1e-14)


def test_matsubara_rejects_negative_index():
    with pytest.raises(ValueError):
        matsubara_frequency(-1, Environment())


def test_grid_half_weight_and_order():
    grid = MatsubaraGrid.build(5, Environment())
    assert grid.frequencies[0] == 0.0
    assert np.all(np.diff(grid.frequencies) > 0)
    assert grid.weights[0] == 0.5 and np.all(grid.weights[1:] == 1.0)


def test_permittivity_gold_oracle():
    # 1 + 8.39^2 / (0.16243^2 + 0.0434 * 0.16243)
    assert permittivity_imag_freq(0.16243, gold) == pytest.approx(2106.4, abs=1.0)


def test_permittivity_plasma_at_plasma_frequency():
    assert permittivity_imag_freq(8.39, MaterialModel.plasma()) == 2.0


def test_permittivity_transparent_at_high_frequency():
    eps = permittivity_imag_freq(100 * 8.39, gold)
    assert 1.0 < eps < 1.0 + 2e-4


@pytest.mark.parametrize("xi", [0.0, -0.1])
def test_permittivity_domain(xi):
    with pytest.raises(ValueError):
        permittivity_imag_freq(xi, gold)


@given(st.floats(1e-6, 1e3), st.floats(1e-6, 1e3))
def test_permittivity_real_ge_one_and_decreasing(a, b):
    lo, hi = sorted((a, b))
    e_lo = permittivity_imag_freq(lo, gold)
    e_hi = permittivity_imag_freq(hi, gold)
    assert e_hi >= 1.0 and np.isfinite(e_lo)
    assert e_lo >= e_hi


@given(st.floats(1e-4, 1e2))
def test_lossless_drude_equals_plasma(xi):
    drude = MaterialModel(8.39, 0.0, MaterialKind.DRUDE)
    assert permittivity_imag_freq(xi, drude) == permittivity_imag_freq(xi, MaterialModel.plasma())


@given(st.integers(1, 500))
def test_matsubara_linear_in_index(l):
    env = Environment(300.0)
    assert matsubara_frequency(l, env) / matsubara_frequency(1, env) == pytest.approx(l, rel=1e-13)


def test_material_validation():
    with pytest.raises(ValueError):
        MaterialModel(plasma_frequency=0.0)
    with pytest.raises(ValueError):
        MaterialModel(dissipation_rate=-1.0)
    with pytest.raises(ValueError):
        MaterialModel(8.39, 0.01, MaterialKind.PLASMA)
    with pytest.raises(ValueError):
        Environment(0.0)


def test_kind_sets_static_convention():
    assert MaterialModel(8.39, 0.0).is_drude
    assert not MaterialModel.plasma().is_drude


def test_scaled_material_keeps_permittivity_shape():
    m2 = gold.scaled(2.0)
    assert permittivity_imag_freq(0.5, m2) == pytest.approx(permittivity_imag_freq(1.0, gold), rel=1e-14)


def test_wavenumber_units():
    assert wavenumber(HBAR_C) == pytest.approx(1.0)
