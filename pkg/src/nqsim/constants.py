"""Physical constants for neutron optics, in SI units."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

MU_NUC = 5.051e-27  # nuclear magneton, J/T


@dataclass(frozen=True)
class PhysicalConstants:
    """Neutron constants. ``mu`` is negative (moment anti-parallel to spin).

    ``gyromagnetic`` is always derived as ``2 * mu / hbar`` so the stored
    values cannot drift apart.
    """

    mu: float = -1.91 * MU_NUC        # magnetic moment, J/T
    mu_nuc: float = MU_NUC            # nuclear magneton, J/T
    mass: float = 1.674e-27           # neutron mass, kg
    hbar: float = 1.054571817e-34     # J s
    h: float = 6.62607015e-34         # J s
    g: float = 9.80665                # m/s^2
    c: float = 299792458.0            # m/s
    gyromagnetic: float = field(init=False)  # rad/(s T), = 2 mu / hbar

    def __post_init__(self):
        if self.mu >= 0:
            raise ValueError("neutron magnetic moment must be negative")
        object.__setattr__(self, "gyromagnetic", 2.0 * self.mu / self.hbar)

    def velocity(self, wavelength):
        """de Broglie velocity v = h / (m lambda), m/s."""
        return self.h / (self.mass * wavelength)

    def wavelength(self, velocity):
        """de Broglie wavelength lambda = h / (m v), m."""
        return self.h / (self.mass * velocity)

    def larmor_rate(self, b_field):
        """Magnitude of the Larmor angular frequency 2|mu|B/hbar, rad/s."""
        return 2.0 * abs(self.mu) * abs(b_field) / self.hbar


CONSTANTS = PhysicalConstants()

TWO_PI = 2.0 * math.pi


def wrap_phase(phi):
    """Wrap a phase to the canonical interval (-pi, pi]."""
    w = math.atan2(math.sin(phi), math.cos(phi))
    if w <= -math.pi + 0.0:  # atan2 returns -pi for the branch point
        w = math.pi
    return w


def phase_distance(a, b):
    """Distance between two phases on the circle, in [0, pi]."""
    return abs(wrap_phase(a - b))
