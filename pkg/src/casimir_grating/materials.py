"""Dielectric response of metals at imaginary frequencies and the Matsubara ladder."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR_C, K_B


class MaterialKind(str, enum.Enum):
    DRUDE = "drude"
    PLASMA = "plasma"


@dataclass(frozen=True)
class MaterialModel:
    """Drude (or dissipationless plasma) metal.

    Energies are in eV. The defaults describe gold.
    """

    plasma_frequency: float = 8.39
    dissipation_rate: float = 0.0434
    kind: MaterialKind = MaterialKind.DRUDE

    def __post_init__(self):
        object.__setattr__(self, "kind", MaterialKind(self.kind))
        if not self.plasma_frequency > 0:
            raise ValueError(f"plasma_frequency must be > 0, got {self.plasma_frequency}")
        if self.dissipation_rate < 0:
            raise ValueError(f"dissipation_rate must be >= 0, got {self.dissipation_rate}")
        if self.kind is MaterialKind.PLASMA and self.dissipation_rate != 0:
            raise ValueError("plasma kind requires dissipation_rate = 0")

    @classmethod
    def plasma(cls, plasma_frequency: float = 8.39) -> "MaterialModel":
        return cls(plasma_frequency, 0.0, MaterialKind.PLASMA)

    @property
    def is_drude(self) -> bool:
        """True for the Drude convention at xi = 0 (static TE reflection vanishes).

        A Drude model with zero dissipation keeps this convention: it is the
        Gamma -> 0+ limit, which differs from the plasma kind only at l = 0.
        """
        return self.kind is MaterialKind.DRUDE

    def scaled(self, s: float) -> "MaterialModel":
        """Material whose plasma wavelength is stretched by ``s`` (all energies divided by s)."""
        return MaterialModel(self.plasma_frequency / s, self.dissipation_rate / s, self.kind)


@dataclass(frozen=True)
class Environment:
    temperature: float = 300.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")

    @property
    def thermal_energy(self) -> float:
        """k_B T in eV."""
        return K_B * self.temperature


def matsubara_frequency(l, env: Environment):
    """Matsubara frequency 2 pi l k_B T (in eV) for index ``l >= 0``."""
    l_arr = np.asarray(l)
    if np.any(l_arr < 0):
        raise ValueError("Matsubara index must be non-negative")
    return 2.0 * math.pi * env.thermal_energy * l_arr


@dataclass(frozen=True)
class MatsubaraGrid:
    """First ``max_index + 1`` Matsubara frequencies; index 0 carries weight 1/2."""

    max_index: int
    frequencies: np.ndarray

    @classmethod
    def build(cls, max_index: int, env: Environment) -> "MatsubaraGrid":
        return cls(max_index, matsubara_frequency(np.arange(max_index + 1), env))

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(self.max_index + 1)
        w[0] = 0.5
        return w


def permittivity_imag_freq(xi, m: MaterialModel):
    """eps(i xi) = 1 + Omega_p^2 / (xi^2 + Gamma xi), real and >= 1 for xi > 0."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("permittivity is only evaluated at xi > 0; xi -> 0 is handled analytically")
    out = 1.0 + m.plasma_frequency**2 / (xi * (xi + m.dissipation_rate))
    return out if out.ndim else float(out)


def wavenumber(xi):
    """Vacuum wavenumber xi / (hbar c) in 1/nm for a frequency given in eV."""
    return np.asarray(xi) / HBAR_C
