"""Casimir pressure between a flat plate and a lamellar metallic grating.

Four routes to the pressure are provided: the modal scattering formula
(:func:`plane_grating_pressure`), the plane-plane Lifshitz formula, the
proximity-force baseline and an effective-medium slab. Units are nm, eV and Pa.
"""

__version__ = "0.1.0"

from .analysis import (BinSchedule, MeasuredCurve, combine_errors, local_power_law, normalize_by_pfa,
                       rolling_weighted_average, scaling_transform)
from .ema import UniaxialPermittivity, ema_pressure, ema_tensor
from .lifshitz import fresnel, lifshitz_pressure
from .materials import (Environment, MaterialKind, MaterialModel, MatsubaraGrid, matsubara_frequency,
                        permittivity_imag_freq)
from .modal import BlochPoint, GratingGeometry, ReflectionOperator, grating_modes, grating_reflection
from .numerics import ConvergenceError, NumericsConfig, PhysicsError
from .pfa import SphereProbe, gradient_to_pressure, pfa_pressure
from .scattering import PressurePoint, plane_grating_pressure, zero_frequency_term

__all__ = [
    "BinSchedule", "BlochPoint", "ConvergenceError", "Environment", "GratingGeometry", "MaterialKind",
    "MaterialModel", "MatsubaraGrid", "MeasuredCurve", "NumericsConfig", "PhysicsError", "PressurePoint",
    "ReflectionOperator", "SphereProbe", "UniaxialPermittivity", "combine_errors", "ema_pressure",
    "ema_tensor", "fresnel", "gradient_to_pressure", "grating_modes", "grating_reflection",
    "lifshitz_pressure", "local_power_law", "matsubara_frequency", "normalize_by_pfa",
    "permittivity_imag_freq", "pfa_pressure", "plane_grating_pressure", "rolling_weighted_average",
    "scaling_transform", "zero_frequency_term",
]
