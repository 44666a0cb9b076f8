"""Unit conventions and wavevector computation.

All energies are in eV and all lengths in nm throughout the package.  The
only combination of particle constants any solver needs is hbar^2/(2m), so a
unit system is just that one number plus a label.  The stationary equation
integrated everywhere is

    psi''(x) = (V(x) - E) / (hbar^2/2m) * psi(x)

and the dispersion in a flat region of potential V is

    k = sqrt(2m (E - V)) / hbar = sqrt((E - V) / (hbar^2/2m)).
"""

import math
from dataclasses import dataclass

from scipy.constants import hbar as _hbar_si, m_e as _me_si, e as _e_si

from .errors import DomainError

# hbar^2 / (2 m_e) converted from J m^2 to eV nm^2; about 0.0380998
HBAR2_OVER_2M_ELECTRON = _hbar_si**2 / (2.0 * _me_si) / _e_si * 1e18

PROPAGATING = "propagating"
EVANESCENT = "evanescent"


@dataclass(frozen=True)
class UnitSystem:
    """Particle/unit convention: hbar^2/(2m) in eV nm^2 plus a label."""

    hbar2_over_2m: float = HBAR2_OVER_2M_ELECTRON
    mass_label: str = "electron"

    def __post_init__(self):
        if not (self.hbar2_over_2m > 0.0 and math.isfinite(self.hbar2_over_2m)):
            raise DomainError(
                f"hbar2_over_2m must be positive and finite, got {self.hbar2_over_2m!r}"
            )


ELECTRON = UnitSystem()


@dataclass(frozen=True)
class WaveNumber:
    """A local wavevector magnitude (1/nm) plus its regime.

    ``propagating`` means E >= V (value is the oscillation wavevector k);
    ``evanescent`` means E < V (value is the decay constant kappa).
    """

    value: float
    regime: str

    def __post_init__(self):
        if self.regime not in (PROPAGATING, EVANESCENT):
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.value < 0.0:
            raise DomainError("wavevector magnitude cannot be negative")

    @property
    def is_propagating(self):
        return self.regime == PROPAGATING


def wavevector(E, V, units=ELECTRON):
    """Wavevector for kinetic energy E - V in a flat region.

    Returns k = sqrt((E-V)/(hbar^2/2m)) as propagating when E >= V, and the
    decay constant kappa = sqrt((V-E)/(hbar^2/2m)) as evanescent otherwise.
    E = V is the zero-kinetic-energy boundary case, classified propagating
    with value 0.  Only the difference E - V matters.
    """
    if not (math.isfinite(E) and math.isfinite(V)):
        raise DomainError("energies must be finite")
    diff = E - V
    if diff >= 0.0:
        return WaveNumber(math.sqrt(diff / units.hbar2_over_2m), PROPAGATING)
    return WaveNumber(math.sqrt(-diff / units.hbar2_over_2m), EVANESCENT)
