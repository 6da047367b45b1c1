"""nqsim: neutron interferometry and polarimetry simulation library."""

__version__ = "0.1.0"

from . import analysis, beamline, elements, qcore, rng, units  # noqa: F401
from .constants import CONSTANTS, PhysicalConstants  # noqa: F401
