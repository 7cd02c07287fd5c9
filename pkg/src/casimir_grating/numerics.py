"""Discretisation knobs and quadrature helpers shared by the pressure solvers."""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field, replace

import numpy as np


class ConvergenceError(RuntimeError):
    """A truncated sum or quadrature did not reach its requested tolerance."""


class PhysicsError(RuntimeError):
    """A physical consistency check failed (e.g. round-trip spectral radius >= 1)."""


class DerivativeScheme(str, enum.Enum):
    ANALYTIC = "analytic"
    CENTRAL_DIFFERENCE = "central_difference"


@dataclass(frozen=True)
class NumericsConfig:
    """All discretisation parameters of the pressure calculations.

    ``bz_nodes`` resolves the direction of the in-plane wavevector inside the
    irreducible quarter of the first Brillouin zone, ``ky_nodes`` its magnitude
    (see :func:`casimir_grating.scattering.wavevector_lattice`).
    """

    truncation_N: int = 10
    matsubara_cap: int = 2000
    bz_nodes: int = 12
    ky_nodes: int = 16
    tail_tolerance: float = 1e-6
    derivative_scheme: DerivativeScheme = DerivativeScheme.ANALYTIC
    fd_step: float = 0.1
    lifshitz_nodes: int = 48
    zero_temperature: bool = False
    frequency_nodes: int = 40
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "derivative_scheme", DerivativeScheme(self.derivative_scheme))
        for name in ("truncation_N", "matsubara_cap", "bz_nodes", "ky_nodes",
                     "lifshitz_nodes", "frequency_nodes", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"numerics.{name} must be >= 1")
        if not 0 < self.tail_tolerance < 1e-2:
            raise ValueError("numerics.tail_tolerance must lie in (0, 1e-2)")
        if not self.fd_step > 0:
            raise ValueError("numerics.fd_step must be > 0")

    def with_(self, **kw) -> "NumericsConfig":
        return replace(self, **kw)


@functools.lru_cache(maxsize=None)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b].

    ``a`` and ``b`` may be arrays; the node axis is appended last.
    """
    x, w = _leggauss(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def exponential_panels(n: int):
    """Nodes/weights on [0, inf) for integrands decaying like exp(-v).

    Three Gauss-Legendre panels [0, 4], [4, 20], [20, 60]; the neglected tail
    is below exp(-60) times a polynomial.
    """
    parts = [gauss_legendre(0.0, 4.0, n), gauss_legendre(4.0, 20.0, n),
             gauss_legendre(20.0, 60.0, max(n // 2, 4))]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


@dataclass
class SeriesAccumulator:
    """Running Matsubara sum with a geometric tail estimate.

    Terms are appended in index order; the reduction order is therefore fixed
    and repeated runs are bit-identical.
    """

    tolerance: float
    terms: list = field(default_factory=list)

    def add(self, values) -> None:
        self.terms.extend(float(v) for v in np.atleast_1d(values))

    @property
    def total(self) -> float:
        return float(np.sum(np.asarray(self.terms)))

    def tail_estimate(self) -> float:
        t = self.terms
        if len(t) < 3:
            return np.inf
        last, prev = abs(t[-1]), abs(t[-2])
        if last == 0.0:
            return 0.0
        ratio = last / prev if prev > 0 else np.inf
        if ratio >= 1.0:
            return np.inf
        return last * ratio / (1.0 - ratio)

    def converged(self) -> bool:
        tot = abs(self.total)
        return tot > 0 and self.tail_estimate() <= self.tolerance * tot


@dataclass(frozen=True)
class FrequencySum:
    """Result of a (primed) Matsubara sum, already multiplied by k_B T.

    ``tail_delta`` is the change produced by tightening the tail tolerance by
    a factor of two; ``terms`` the number of Matsubara terms used.
    """

    value: float
    tail_delta: float
    terms: int
    zero_term: float


def thermal_sum(term, thermal_energy: float, num: NumericsConfig, length_scale: float,
                block: int = 16, strict: bool = True) -> FrequencySum:
    """Evaluate k_B T * sum'_l term(xi_l), or its T -> 0 integral.

    ``term`` maps an array of frequencies (eV) to an array of contributions and
    must handle ``xi == 0`` itself. When the Matsubara cap is reached before the
    tail criterion holds, a :class:`ConvergenceError` is raised unless
    ``strict`` is false, in which case the truncated sum is returned. In zero-temperature mode the sum becomes
    (1/2pi) * integral over xi, sampled on a grid scaled by ``length_scale`` (nm)
    so that geometries related by a similarity transform use similar nodes.
    """
    from .constants import HBAR_C

    if num.zero_temperature:
        zeta, w = exponential_panels(num.frequency_nodes)
        scale = HBAR_C / (2.0 * length_scale)
        vals = np.asarray(term(scale * zeta), dtype=float)
        return FrequencySum(float(np.sum(w * vals)) * scale / (2.0 * np.pi), 0.0, 0, 0.0)

    step = 2.0 * np.pi * thermal_energy
    coarse = SeriesAccumulator(num.tail_tolerance)
    coarse_value = None
    l = 0
    while True:
        stop = min(l + block, num.matsubara_cap)
        idx = np.arange(l, stop)
        vals = np.asarray(term(step * idx), dtype=float)
        if l == 0:
            vals = vals.copy()
            vals[0] *= 0.5
        for v in vals:
            coarse.add(v)
            if coarse_value is None and coarse.converged():
                coarse_value = coarse.total
                coarse.tolerance /= 2.0
            elif coarse_value is not None and coarse.converged():
                fine = coarse.total
                n_terms = len(coarse.terms)
                return FrequencySum(thermal_energy * coarse_value,
                                    thermal_energy * abs(fine - coarse_value),
                                    n_terms, thermal_energy * coarse.terms[0])
        l = stop
        if l >= num.matsubara_cap:
            if not strict or coarse_value is not None:
                tot = coarse_value if coarse_value is not None else coarse.total
                return FrequencySum(thermal_energy * tot,
                                    thermal_energy * coarse.tail_estimate(),
                                    len(coarse.terms), thermal_energy * coarse.terms[0])
            raise ConvergenceError(
                f"Matsubara sum not converged after {num.matsubara_cap} terms "
                f"(tail estimate {coarse.tail_estimate():.3e}, sum {coarse.total:.3e})")
