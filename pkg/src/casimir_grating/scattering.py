"""Plane-grating Casimir pressure from the round-trip operator of the cavity.

P(d) = -k_B T sum'_l int d^2k/(2 pi)^2 d/dd tr log(1 - R_p K R_g K),
with k in the first Brillouin zone and the trace running over diffraction
orders and polarisations. The zone integral uses mirror symmetry in k_x and
k_y and polar coordinates in the irreducible quarter, which keeps the
|k| cusp of the static term and the exp(-2 kappa d) concentration at large d
under control.
"""

from __future__ import annotations

import concurrent.futures as futures
import math
from dataclasses import dataclass

import numpy as np

from .constants import EV_PER_NM3_TO_PA
from .lifshitz import fresnel_coefficients, static_reflection
from .materials import Environment, MaterialModel, permittivity_imag_freq, wavenumber
from .modal import (GratingGeometry, grating_reflection_batch, parallel_wavevectors,
                    static_tm_reflection)
from .numerics import (ConvergenceError, DerivativeScheme, NumericsConfig, PhysicsError,
                       gauss_legendre, thermal_sum)

#: 2 d (kappa - q) beyond which the integrand is dropped (exp(-35) ~ 6e-16)
_DECAY_CUTOFF = 35.0
#: xi / Omega_p at which the static TE block of a plasma metal is sampled
_STATIC_TE_PROBE = 1e-5
_KAPPA_FLOOR = 1e-9  # 1/nm


class BudgetExceededError(ConvergenceError):
    """The estimated numerical error exceeds 2% of the pressure."""


@dataclass(frozen=True)
class PressurePoint:
    d: float
    pressure: float
    numeric_error: float
    truncation_N: int = 0
    matsubara_terms: int = 0
    zero_term: float = 0.0


def cutoff_wavevector(q: float, d: float) -> float:
    """|k| beyond which exp(-2 d (kappa - q)) < exp(-35)."""
    a = q + 0.5 * _DECAY_CUTOFF / d
    return math.sqrt(a * a - q * q)


def wavevector_lattice(g: GratingGeometry, d: float, q: float, num: NumericsConfig):
    """Quadrature over the irreducible quarter 0 <= k_x <= pi/p, k_y >= 0.

    Polar coordinates: ``num.bz_nodes`` Gauss-Legendre angles on [0, pi/2],
    ``num.ky_nodes`` radial nodes on [0, min(pi/(p cos phi), k_cut)].
    Returns flat arrays (k_x, k_y, weight) with the Jacobian included.
    """
    zone = math.pi / g.period_p
    cut = cutoff_wavevector(q, d)
    if cut > zone:
        # the radial limit has a kink where the zone edge meets the cutoff circle
        phi_c = math.acos(zone / cut)
        n_edge = max(4, num.bz_nodes // 2)
        a, wa = gauss_legendre(0.0, phi_c, num.bz_nodes)
        b, wb = gauss_legendre(phi_c, 0.5 * math.pi, n_edge)
        phi, wphi = np.concatenate([a, b]), np.concatenate([wa, wb])
    else:
        phi, wphi = gauss_legendre(0.0, 0.5 * math.pi, num.bz_nodes)
    rho_end = np.minimum(zone / np.cos(phi), cut)
    rho, wrho = gauss_legendre(np.zeros_like(rho_end), rho_end, num.ky_nodes)
    kx = rho * np.cos(phi)[:, None]
    ky = rho * np.sin(phi)[:, None]
    w = wrho * rho * wphi[:, None]
    return kx.ravel(), ky.ravel(), w.ravel()


def round_trip(rp, Rg, kdiag):
    """M = R_p K R_g K for diagonal R_p (vector ``rp``) and K (vector ``kdiag``)."""
    return (rp * kdiag)[..., :, None] * Rg * kdiag[..., None, :]


def trace_log(M):
    """log det(1 - M), i.e. tr log(1 - M), for real M with spectral radius < 1."""
    sign, logdet = np.linalg.slogdet(np.eye(M.shape[-1]) - M)
    if np.any(sign <= 0):
        raise PhysicsError("1 - M is not positive definite: round-trip spectral radius >= 1")
    return logdet


def trace_log_eigen(M):
    """Independent evaluation of tr log(1 - M) as sum of log(1 - mu) over eigenvalues of M."""
    mu = np.linalg.eigvals(M)
    if np.any(np.abs(mu) >= 1):
        raise PhysicsError("round-trip spectral radius >= 1")
    return np.sum(np.log(1.0 - mu), axis=-1).real


def _analytic_integrand(M, kappa):
    """d/dd tr log(1 - M) = tr[(1 - M)^-1 M o (kappa_i + kappa_j)] (>= 0)."""
    B = M * (kappa[..., :, None] + kappa[..., None, :])
    X = np.linalg.solve(np.eye(M.shape[-1]) - M, B)
    return np.trace(X, axis1=-2, axis2=-1)


@dataclass
class _Operators:
    """Distance-independent ingredients at one frequency and a set of k points."""

    rp: np.ndarray
    Rg: np.ndarray
    kappa: np.ndarray


def _operators(xi: float, kx, ky, g: GratingGeometry, m: MaterialModel, N: int) -> _Operators:
    kxn = parallel_wavevectors(g, kx, N)
    kyb = np.asarray(ky, dtype=float)[..., None]
    kpar = np.sqrt(kxn**2 + kyb**2)
    if xi > 0:
        q = float(wavenumber(xi))
        eps = permittivity_imag_freq(xi, m)
        r_te, r_tm = fresnel_coefficients(q, kpar, eps)
        Rg = grating_reflection_batch(g, eps, kx, ky, q, N)
        kappa = np.sqrt(kpar**2 + q * q)
        return _Operators(np.concatenate([r_te, r_tm], axis=-1), Rg,
                          np.concatenate([kappa, kappa], axis=-1))
    # xi = 0: the TM block is electrostatic; TE vanishes for a Drude metal.
    # kappa is floored so that the k = 0 point (where 1 - M is singular but the
    # integrand tends to 1/d) stays finite
    kpar = np.maximum(kpar, _KAPPA_FLOOR)
    R_tm = static_tm_reflection(g, kx, ky, N)
    if m.is_drude:
        return _Operators(np.ones_like(kpar), R_tm, kpar)
    r_te, _ = static_reflection(kpar, m)
    xi0 = _STATIC_TE_PROBE * m.plasma_frequency
    R_probe = grating_reflection_batch(g, permittivity_imag_freq(xi0, m), kx, ky,
                                       float(wavenumber(xi0)), N)
    n = kxn.shape[-1]
    Rg = np.zeros(kxn.shape[:-1] + (2 * n, 2 * n))
    Rg[..., :n, :n] = R_probe[..., :n, :n]
    Rg[..., n:, n:] = R_tm
    return _Operators(np.concatenate([r_te, np.ones_like(kpar)], axis=-1), Rg,
                      np.concatenate([kpar, kpar], axis=-1))


def _integrand_from_operators(ops: _Operators, d: float, num: NumericsConfig):
    kdiag = np.exp(-ops.kappa * d)
    if num.derivative_scheme is DerivativeScheme.ANALYTIC:
        return _analytic_integrand(round_trip(ops.rp, ops.Rg, kdiag), ops.kappa)
    h = num.fd_step
    up = trace_log(round_trip(ops.rp, ops.Rg, np.exp(-ops.kappa * (d + h))))
    down = trace_log(round_trip(ops.rp, ops.Rg, np.exp(-ops.kappa * (d - h))))
    return (up - down) / (2 * h)


def pressure_integrand(xi: float, k_x, k_y, d: float, g: GratingGeometry,
                       m: MaterialModel = MaterialModel(), N: int = 10,
                       scheme: DerivativeScheme | str = DerivativeScheme.ANALYTIC,
                       step: float = 0.1):
    """d/dd tr log(1 - M) at frequency ``xi`` (eV) and Bloch wavevectors (1/nm).

    Non-negative; the pressure is -k_B T sum' int d^2k/(2pi)^2 of it.
    """
    num = NumericsConfig(truncation_N=N, derivative_scheme=scheme, fd_step=step)
    ops = _operators(xi, np.asarray(k_x, dtype=float), np.asarray(k_y, dtype=float), g, m, N)
    return _integrand_from_operators(ops, d, num)


def _frequency_term(xi: float, d: float, g: GratingGeometry, m: MaterialModel,
                    num: NumericsConfig, N: int) -> float:
    """(1/pi^2) int over the quarter zone of the integrand, in 1/nm^3."""
    q = float(wavenumber(xi))
    kx, ky, w = wavevector_lattice(g, d, q, num)
    ops = _operators(xi, kx, ky, g, m, N)
    vals = _integrand_from_operators(ops, d, num)
    return float(np.sum(w * vals)) / math.pi**2


def _term_function(d, g, m, num, N):
    def term(xis):
        xis = [float(x) for x in np.atleast_1d(xis)]
        if num.threads > 1 and len(xis) > 1:
            with futures.ThreadPoolExecutor(num.threads) as pool:
                return np.array(list(pool.map(lambda x: _frequency_term(x, d, g, m, num, N), xis)))
        return np.array([_frequency_term(x, d, g, m, num, N) for x in xis])
    return term


def _raw_pressure(d, g, m, env, num, N, strict=True):
    block = max(num.threads, 4)
    res = thermal_sum(_term_function(d, g, m, num, N), env.thermal_energy, num,
                      length_scale=d, block=block, strict=strict)
    return res


def zero_frequency_term(d: float, g: GratingGeometry, m: MaterialModel = MaterialModel(),
                        env: Environment = Environment(), num: NumericsConfig = NumericsConfig()) -> float:
    """Half-weighted l = 0 contribution to the pressure, in Pa.

    Drude metals: only TM survives and the grating acts as an equipotential
    conductor (see :func:`modal.static_tm_reflection`); the plane's TM
    reflection is exactly 1 and its TE reflection 0. Plasma metals add a TE
    block from the London-screened response.
    """
    if not d > 0:
        raise ValueError("separation must be > 0")
    val = _frequency_term(0.0, d, g, m, num, num.truncation_N)
    return -0.5 * env.thermal_energy * val * EV_PER_NM3_TO_PA


def plane_grating_pressure(d: float, g: GratingGeometry = GratingGeometry(),
                           m: MaterialModel = MaterialModel(), env: Environment = Environment(),
                           num: NumericsConfig = NumericsConfig(), *, estimate_error: bool = True,
                           adaptive: bool = True, max_N: int | None = None,
                           strict: bool = True) -> PressurePoint:
    """Plane-grating pressure (Pa) at separation ``d`` (nm) measured from the ridge tops.

    With ``estimate_error`` the result carries
    ``sqrt(tail_delta^2 + |P(N+2) - P(N)|^2)``; when ``adaptive`` is set the
    truncation is raised in steps of 2 until that step changes P by < 0.5%
    (at most to ``max_N``, default 2N). A :class:`BudgetExceededError` is
    raised when the error exceeds 2% of |P|.
    """
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    N = num.truncation_N
    res = _raw_pressure(d, g, m, env, num, N, strict)
    pressure = -res.value * EV_PER_NM3_TO_PA
    tail = res.tail_delta * EV_PER_NM3_TO_PA
    if not estimate_error or g.height_h == 0:
        return PressurePoint(d, pressure, tail, N, res.terms, -res.zero_term * EV_PER_NM3_TO_PA)
    max_N = max_N if max_N is not None else 2 * N
    while True:
        nxt = _raw_pressure(d, g, m, env, num, N + 2, strict)
        p_next = -nxt.value * EV_PER_NM3_TO_PA
        delta_N = abs(p_next - pressure)
        if not adaptive or delta_N <= 0.005 * abs(pressure) or N + 2 >= max_N:
            break
        N, res, pressure = N + 2, nxt, p_next
        tail = res.tail_delta * EV_PER_NM3_TO_PA
    err = math.hypot(tail, delta_N)
    if err > 0.02 * abs(pressure):
        raise BudgetExceededError(
            f"numerical error {err:.3e} Pa exceeds 2% of |P| = {abs(pressure):.3e} Pa at d = {d} nm")
    return PressurePoint(d, pressure, err, N, res.terms, -res.zero_term * EV_PER_NM3_TO_PA)
