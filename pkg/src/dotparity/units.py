"""Unit conventions.

Energies are in meV with hbar = 1, so times are in units of hbar/meV
(about 0.658 ps).  Lengths are in nm.
"""

import math

HBAR_MEV_PS = 0.6582119569
"""hbar in meV * ps; one internal time unit expressed in picoseconds."""

HBAR_C_EV_NM = 197.327
"""hbar * c in eV * nm, used to turn a photon energy into a wavevector."""

TWO_PI = 2.0 * math.pi


def ns_to_internal(t_ns: float) -> float:
    return t_ns * 1e3 / HBAR_MEV_PS


def internal_to_ns(t: float) -> float:
    return t * HBAR_MEV_PS * 1e-3


def wavevector_per_nm(energy_ev: float) -> float:
    """Vacuum wavevector k0 = E / (hbar c) in 1/nm for a photon of `energy_ev`."""
    return energy_ev / HBAR_C_EV_NM
