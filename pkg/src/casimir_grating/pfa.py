"""Proximity-force baselines for the plate-grating and sphere-grating setups."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .lifshitz import lifshitz_pressure_with_error
from .materials import Environment, MaterialModel
from .modal import GratingGeometry
from .numerics import NumericsConfig

# d/R above which the sphere-plane proximity mapping is flagged
PFA_VALIDITY_LIMIT = 0.05


class ProximityWarning(UserWarning):
    """Raised (as a warning) when a probe is used outside d << R."""


@dataclass(frozen=True)
class SphereProbe:
    """Spherical force probe of radius ``radius_R`` in micrometres."""

    radius_R: float = 151.7

    def __post_init__(self):
        if not (self.radius_R > 0 and math.isfinite(self.radius_R)):
            raise ValueError(f"probe.radius_R must be positive, got {self.radius_R}")

    @property
    def radius_m(self) -> float:
        return self.radius_R * 1e-6

    def is_valid_at(self, d: float) -> bool:
        """True when the separation ``d`` (nm) is small compared to R."""
        return d / (self.radius_R * 1e3) <= PFA_VALIDITY_LIMIT

    def check(self, d: float) -> bool:
        ok = self.is_valid_at(d)
        if not ok:
            warnings.warn(f"d/R = {d / (self.radius_R * 1e3):.3g} exceeds {PFA_VALIDITY_LIMIT}; "
                          "proximity conversion is unreliable", ProximityWarning, stacklevel=2)
        return ok


def pfa_pressure_with_error(d: float, g: GratingGeometry = GratingGeometry(),
                            m: MaterialModel = MaterialModel(), env: Environment = Environment(),
                            num: NumericsConfig = NumericsConfig()) -> tuple[float, float]:
    """(pressure, numeric error) in Pa, errors combined with the same weights."""
    if not d > 0:
        raise ValueError(f"separation must be positive, got {d}")
    f = g.filling_factor
    p_top, e_top = lifshitz_pressure_with_error(d, m, env, num)
    if f == 1.0 or g.height_h == 0:
        return p_top, e_top
    p_bot, e_bot = lifshitz_pressure_with_error(d + g.height_h, m, env, num)
    return f * p_top + (1.0 - f) * p_bot, f * e_top + (1.0 - f) * e_bot


def pfa_pressure(d: float, g: GratingGeometry = GratingGeometry(), m: MaterialModel = MaterialModel(),
                 env: Environment = Environment(), num: NumericsConfig = NumericsConfig()) -> float:
    """Area-weighted plane-plane pressure: ridges at ``d``, trench bottoms at ``d + h`` (Pa).

    Depends on the geometry only through the filling factor and the depth.
    """
    return pfa_pressure_with_error(d, g, m, env, num)[0]


def gradient_to_pressure(dF_dd: float, probe: SphereProbe = SphereProbe()) -> float:
    """Sphere force gradient (N/m) to the equivalent plate pressure (Pa)."""
    return dF_dd / (2.0 * math.pi * probe.radius_m)


def pressure_to_gradient(pressure: float, probe: SphereProbe = SphereProbe()) -> float:
    """Inverse of :func:`gradient_to_pressure`."""
    return pressure * 2.0 * math.pi * probe.radius_m
