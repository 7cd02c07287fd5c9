"""Plane-plane Casimir pressure between two semi-infinite Drude/plasma half-spaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import EV_PER_NM3_TO_PA
from .materials import Environment, MaterialModel, permittivity_imag_freq, wavenumber
from .numerics import NumericsConfig, exponential_panels, thermal_sum


@dataclass(frozen=True)
class FresnelPair:
    """Reflection amplitudes of a half-space at imaginary frequency.

    Sign convention: ``r_te = (kappa - kappa_m)/(kappa + kappa_m)`` is <= 0 and
    ``r_tm = (eps kappa - kappa_m)/(eps kappa + kappa_m)`` is >= 0, so a perfect
    mirror has ``r_te = -1`` and ``r_tm = +1``. Only squares enter the
    plane-plane pressure.
    """

    r_te: float
    r_tm: float


def fresnel_coefficients(q, k_par, eps):
    """Vectorised TE/TM Fresnel coefficients; ``q = xi/(hbar c)`` in 1/nm.

    ``eps`` may be ``np.inf`` (perfect conductor). Arrays broadcast.
    """
    q = np.asarray(q, dtype=float)
    k_par = np.asarray(k_par, dtype=float)
    eps = np.asarray(eps, dtype=float)
    kappa = np.sqrt(k_par**2 + q**2)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        kappa_m = np.sqrt(k_par**2 + eps * q**2)
        r_te = np.where(np.isinf(eps), -1.0, (kappa - kappa_m) / (kappa + kappa_m))
        # eps kappa vs kappa_m: divide through by eps to stay finite as eps -> inf
        r_tm = np.where(np.isinf(eps), 1.0,
                        (kappa - kappa_m / eps) / (kappa + kappa_m / eps))
    r_te = np.where(kappa + kappa_m == 0, 0.0, r_te)
    return r_te, r_tm


def fresnel(xi: float, k_par: float, eps: float, m: MaterialModel | None = None) -> FresnelPair:
    """Fresnel pair at frequency ``xi`` (eV) and parallel wavevector ``k_par`` (1/nm).

    At ``xi == 0`` the analytic static limit is returned: ``(0, 1)`` for a
    Drude metal (or when no material is given) and the London-type TE value
    for a plasma metal.
    """
    if xi < 0 or k_par < 0 or eps < 1:
        raise ValueError("fresnel requires xi >= 0, k_par >= 0 and eps >= 1")
    if xi == 0:
        r_te, r_tm = static_reflection(k_par, m)
        return FresnelPair(float(r_te), float(r_tm))
    r_te, r_tm = fresnel_coefficients(wavenumber(xi), k_par, eps)
    return FresnelPair(float(r_te), float(r_tm))


def static_reflection(k_par, m: MaterialModel | None):
    """xi -> 0 limit of the half-space coefficients (TE, TM)."""
    k_par = np.asarray(k_par, dtype=float)
    r_tm = np.ones_like(k_par)
    if m is None or m.is_drude:
        return np.zeros_like(k_par), r_tm
    alpha = wavenumber(m.plasma_frequency)
    with np.errstate(invalid="ignore", divide="ignore"):
        r_te = (k_par - np.sqrt(k_par**2 + alpha**2)) / (k_par + np.sqrt(k_par**2 + alpha**2))
    return r_te, r_tm


def _frequency_term(xi, d: float, m: MaterialModel, nodes: int):
    """Integral over kappa of kappa^2 sum_p x_p/(1 - x_p), x_p = r_p^2 exp(-2 kappa d).

    Evaluated with u = 2 kappa d = u0 + v and Gauss-Legendre panels in v.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    v, w = exponential_panels(nodes)
    q = wavenumber(xi)[:, None]
    u = 2.0 * q * d + v[None, :]
    kappa = u / (2.0 * d)
    k_par = np.sqrt(np.maximum(kappa**2 - q**2, 0.0))
    static = xi[:, None] == 0
    eps = np.where(static, 1.0, permittivity_imag_freq(np.where(xi == 0, 1.0, xi), m)[:, None])
    r_te, r_tm = fresnel_coefficients(q, k_par, eps)
    if np.any(static):
        s_te, s_tm = static_reflection(k_par, m)
        r_te = np.where(static, s_te, r_te)
        r_tm = np.where(static, s_tm, r_tm)
    decay = np.exp(-u)
    total = np.zeros_like(u)
    for r in (r_te, r_tm):
        x = r**2 * decay
        total += x / (1.0 - x)
    # kappa^2 dkappa = u^2 du / (2d)^3
    return (u**2 * total) @ w / (2.0 * d) ** 3


def lifshitz_pressure(d: float, m: MaterialModel = MaterialModel(), env: Environment = Environment(),
                      num: NumericsConfig = NumericsConfig(), *, return_details: bool = False):
    """Plane-plane pressure in Pa (negative = attractive) at separation ``d`` in nm.

    P = -(k_B T / pi) sum'_l int_q^inf dkappa kappa^2 sum_p r_p^2 e^{-2 kappa d}/(1 - r_p^2 e^{-2 kappa d}).
    """
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    res = thermal_sum(lambda xi: _frequency_term(xi, d, m, num.lifshitz_nodes),
                      env.thermal_energy, num, d, block=64)
    pressure = -res.value / np.pi * EV_PER_NM3_TO_PA
    if return_details:
        return pressure, res
    return pressure


def lifshitz_pressure_with_error(d: float, m: MaterialModel = MaterialModel(),
                                 env: Environment = Environment(),
                                 num: NumericsConfig = NumericsConfig()) -> tuple[float, float]:
    """(pressure, numeric error) in Pa; the error is the Matsubara tail estimate."""
    pressure, res = lifshitz_pressure(d, m, env, num, return_details=True)
    return pressure, abs(res.tail_delta) / np.pi * EV_PER_NM3_TO_PA


def lifshitz_integrand(xi: float, k_par, d: float, m: MaterialModel):
    """d/dd of log(1 - r^2 e^{-2 kappa d}) summed over polarisations, per (xi, k_par).

    Equals the scattering-module integrand for a flat surface; non-negative.
    """
    k_par = np.asarray(k_par, dtype=float)
    q = wavenumber(xi)
    kappa = np.sqrt(k_par**2 + q**2)
    if xi == 0:
        r_te, r_tm = static_reflection(k_par, m)
    else:
        r_te, r_tm = fresnel_coefficients(q, k_par, permittivity_imag_freq(xi, m))
    out = np.zeros_like(kappa)
    for r in (r_te, r_tm):
        r2 = r**2
        x = r2 * np.exp(-2 * kappa * d)
        # 1 - x without cancellation when |r| = 1; the kappa -> 0 limit is 1/d
        denom = np.where(r2 == 1.0, -np.expm1(-2 * kappa * d), 1.0 - x)
        safe = denom > 0
        out += np.where(safe, 2 * kappa * x / np.where(safe, denom, 1.0), 1.0 / d)
    return out
