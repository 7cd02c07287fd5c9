"""Effective-medium baseline: the grating replaced by a uniaxial slab on gold.

The slab has its optic axis along x (the modulation direction). Its
reflection matrix is computed by the modal solver truncated to the single
specular order: with one order the Laurent rule gives eps_yy = eps_zz and the
inverse rule gives eps_xx, which are exactly the two mixing formulas below.
TE and TM couple at conical incidence, so the reflection is a full 2x2 matrix
in the (TE, TM) basis of the specular order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EV_PER_NM3_TO_PA
from .lifshitz import static_reflection
from .materials import Environment, MaterialModel, permittivity_imag_freq, wavenumber
from .modal import GratingGeometry, grating_reflection_batch
from .numerics import NumericsConfig, exponential_panels, gauss_legendre, thermal_sum
from .scattering import _STATIC_TE_PROBE, _analytic_integrand, round_trip


@dataclass(frozen=True)
class UniaxialPermittivity:
    eps_xx: float
    eps_yy: float
    eps_zz: float


def ema_tensor(f: float, eps_D: float) -> UniaxialPermittivity:
    """Homogenised tensor of a lamellar medium with metal fraction ``f``.

    Parallel to the lamellae (y, z) the layers add like capacitors in parallel;
    across them (x) like capacitors in series.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"filling factor must be in [0, 1], got {f}")
    if eps_D < 1:
        raise ValueError(f"eps_D must be >= 1, got {eps_D}")
    par = eps_D * f + (1.0 - f)
    perp = eps_D / (f + eps_D * (1.0 - f))
    return UniaxialPermittivity(perp, par, par)


def _slab_operators(xi, kx, ky, g, m):
    """Plate reflection (TE, TM), slab 2x2 reflection and kappa (both entries)."""
    k = np.hypot(kx, ky)[..., None]
    if xi > 0:
        q = float(wavenumber(xi))
        eps = permittivity_imag_freq(xi, m)
        kappa = np.sqrt(k**2 + q * q)
        r_te = (kappa - np.sqrt(k**2 + eps * q * q)) / (kappa + np.sqrt(k**2 + eps * q * q))
        r_tm = (eps * kappa - np.sqrt(k**2 + eps * q * q)) / (eps * kappa + np.sqrt(k**2 + eps * q * q))
        Rs = grating_reflection_batch(g, eps, kx, ky, q, 0)
        return np.concatenate([r_te, r_tm], axis=-1), Rs, np.concatenate([kappa, kappa], axis=-1)
    # xi = 0: eps_zz -> infinity screens the slab top completely for TM
    Rs = np.zeros(kx.shape + (2, 2))
    Rs[..., 1, 1] = 1.0
    r_te = np.zeros_like(k)
    if not m.is_drude:
        r_te, _ = static_reflection(k, m)
        xi0 = _STATIC_TE_PROBE * m.plasma_frequency
        probe = grating_reflection_batch(g, permittivity_imag_freq(xi0, m), kx, ky,
                                         float(wavenumber(xi0)), 0)
        Rs[..., 0, 0] = probe[..., 0, 0]
    return np.concatenate([r_te, np.ones_like(k)], axis=-1), Rs, np.concatenate([k, k], axis=-1)


def _frequency_term(xi: float, d: float, g: GratingGeometry, m: MaterialModel, num: NumericsConfig):
    """(1/pi^2) int over the quarter k plane of d/dd tr log(1 - M), in 1/nm^3."""
    q = float(wavenumber(xi)) if xi > 0 else 0.0
    phi, wphi = gauss_legendre(0.0, 0.5 * math.pi, num.bz_nodes)
    # radial variable: kappa = q + u/(2d), k dk = kappa dkappa
    u, wu = exponential_panels(num.lifshitz_nodes)
    kappa = q + u / (2.0 * d)
    k = np.sqrt(np.maximum(kappa**2 - q * q, 0.0))
    kx = (k[None, :] * np.cos(phi)[:, None]).ravel()
    ky = (k[None, :] * np.sin(phi)[:, None]).ravel()
    w = (wphi[:, None] * (kappa * wu / (2.0 * d))[None, :]).ravel()
    rp, Rs, kap = _slab_operators(xi, kx, ky, g, m)
    vals = _analytic_integrand(round_trip(rp, Rs, np.exp(-kap * d)), kap)
    return float(np.sum(w * vals)) / math.pi**2


def ema_pressure_with_error(d: float, g: GratingGeometry = GratingGeometry(),
                            m: MaterialModel = MaterialModel(), env: Environment = Environment(),
                            num: NumericsConfig = NumericsConfig()) -> tuple[float, float]:
    """(pressure, Matsubara tail error) in Pa."""
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    res = thermal_sum(lambda xis: np.array([_frequency_term(float(x), d, g, m, num)
                                            for x in np.atleast_1d(xis)]),
                      env.thermal_energy, num, d, block=32)
    return -res.value * EV_PER_NM3_TO_PA, abs(res.tail_delta) * EV_PER_NM3_TO_PA


def ema_pressure(d: float, g: GratingGeometry = GratingGeometry(), m: MaterialModel = MaterialModel(),
                 env: Environment = Environment(), num: NumericsConfig = NumericsConfig()) -> float:
    """Plate vs uniaxial slab (thickness h, on gold bulk) pressure in Pa at distance ``d`` (nm)."""
    return ema_pressure_with_error(d, g, m, env, num)[0]
