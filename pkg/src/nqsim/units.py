"""Parsing of unit-suffixed numeric strings used in run configurations.

Config values like ``"1.1mT"``, ``"144Gcm"``, ``"2.0A"`` (angstrom) or
``"45kV"`` are converted to SI on load.  Each known suffix carries a
dimension tag so a field-integral cannot silently land where a wavelength
was expected.
"""

from __future__ import annotations

import math
import re

# suffix -> (SI factor, dimension)
_UNITS = {
    # magnetic field
    "T": (1.0, "field"),
    "mT": (1e-3, "field"),
    "uT": (1e-6, "field"),
    "G": (1e-4, "field"),
    # field integral (field x length)
    "Tm": (1.0, "field_integral"),
    "Gcm": (1e-6, "field_integral"),
    # length
    "m": (1.0, "length"),
    "cm": (1e-2, "length"),
    "mm": (1e-3, "length"),
    "um": (1e-6, "length"),
    "nm": (1e-9, "length"),
    "A": (1e-10, "length"),  # angstrom
    "pm": (1e-12, "length"),
    # voltage
    "V": (1.0, "voltage"),
    "kV": (1e3, "voltage"),
    # electric field
    "V/m": (1.0, "efield"),
    "kV/m": (1e3, "efield"),
    "kV/cm": (1e5, "efield"),
    # time
    "s": (1.0, "time"),
    "ms": (1e-3, "time"),
    "us": (1e-6, "time"),
    "ns": (1e-9, "time"),
    # frequency
    "Hz": (1.0, "frequency"),
    "kHz": (1e3, "frequency"),
    "MHz": (1e6, "frequency"),
    "mHz": (1e-3, "frequency"),
    "uHz": (1e-6, "frequency"),
    # angle
    "rad": (1.0, "angle"),
    "mrad": (1e-3, "angle"),
    "deg": (math.pi / 180.0, "angle"),
    # velocity
    "m/s": (1.0, "velocity"),
    # plain scalar
    "": (1.0, "scalar"),
}

_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$")


class UnitError(ValueError):
    """Raised for a malformed quantity string or an unknown unit suffix."""


def parse_quantity(text, expect=None):
    """Parse ``"1.1mT"``-style text (or a bare number) to an SI float.

    ``expect`` optionally names the required dimension ("field", "length",
    "angle", ...).  Bare numbers are accepted for any dimension and taken
    as already-SI.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    if not isinstance(text, str):
        raise UnitError(f"expected number or quantity string, got {text!r}")
    m = _NUMBER.match(text)
    if not m:
        raise UnitError(f"malformed quantity {text!r}")
    value, suffix = float(m.group(1)), m.group(2)
    if suffix not in _UNITS:
        raise UnitError(f"unknown unit suffix {suffix!r} in {text!r}")
    factor, dim = _UNITS[suffix]
    if expect is not None and suffix != "" and dim != expect:
        raise UnitError(
            f"unit {suffix!r} in {text!r} has dimension {dim!r}, expected {expect!r}"
        )
    return value * factor
