"""Physical constants in the library's unit system (eV, nm, K, Pa).

Values are CODATA 2018 as shipped by :mod:`scipy.constants`.
"""

from scipy import constants as _c

#: reduced Planck constant times speed of light [eV nm]
HBAR_C = _c.hbar * _c.c / _c.e * 1e9
#: Boltzmann constant [eV / K]
K_B = _c.k / _c.e
#: one eV / nm^3 expressed in pascal
EV_PER_NM3_TO_PA = _c.e * 1e27


def ideal_mirror_pressure(d):
    """Zero-temperature pressure between perfect mirrors, -pi^2 hbar c / (240 d^4), in Pa (d in nm)."""
    import math

    return -(math.pi**2) * HBAR_C / (240.0 * d**4) * EV_PER_NM3_TO_PA
