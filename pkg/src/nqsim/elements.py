"""Neutron-optical device records and their operator/channel constructors.

Each spec is an immutable parameter record in SI units; lowering to an
operator happens against a state's dof layout.  Formulas follow the
standard phase-shifter, Larmor, RF-resonance and absorber laws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import qcore
from .constants import CONSTANTS
from .qcore import (ENERGY, PATH, SPIN, LinearOperator, MixedState, PureState,
                    apply, embedded_matrix)


@dataclass(frozen=True)
class BeamSpec:
    """Monochromatic beam: wavelength (m), relative spread, polarization."""

    wavelength: float
    spread: float = 0.0
    polarization: tuple = (0.0, 0.0, 1.0)
    mean_counts: float = 1e4

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.spread < 0:
            raise ValueError("wavelength spread must be non-negative")

    @property
    def velocity(self) -> float:
        return CONSTANTS.velocity(self.wavelength)

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Transmission/reflection amplitudes with |r|^2 + |t|^2 = 1."""

    r: complex
    t: complex

    def __post_init__(self):
        if abs(abs(self.r) ** 2 + abs(self.t) ** 2 - 1.0) > 1e-10:
            raise ValueError("|r|^2 + |t|^2 must equal 1")

    @staticmethod
    def balanced() -> "BeamSplitterSpec":
        return BeamSplitterSpec(r=1 / math.sqrt(2), t=1 / math.sqrt(2))

    @staticmethod
    def from_reflectivity(r2: float) -> "BeamSplitterSpec":
        if not 0.0 <= r2 <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")
        return BeamSplitterSpec(r=math.sqrt(r2), t=math.sqrt(1.0 - r2))


@dataclass(frozen=True)
class PhaseShifterSpec:
    """Relative path phase, either direct (rad) or from slab material data."""

    delta_chi: float = None
    number_density: float = None  # atoms / m^3
    b_c: float = None             # coherent scattering length, m
    thickness: float = None       # slab thickness difference, m
    wavelength: float = None

    def chi(self) -> float:
        if self.delta_chi is not None:
            return float(self.delta_chi)
        return phase_shifter_chi(self.number_density, self.b_c,
                                 self.wavelength, self.thickness)


@dataclass(frozen=True)
class DcCoilSpec:
    """Static-field spin rotator: explicit angle or (B, L) with Eq.-style Larmor angle."""

    axis: tuple = (0.0, 1.0, 0.0)
    angle: float = None
    b_field: float = None
    length: float = None
    velocity: float = None

    def rotation_angle(self) -> float:
        if self.angle is not None:
            return float(self.angle)
        return larmor_angle(self.b_field, self.length, self.velocity)

    def operator(self, dof=SPIN) -> LinearOperator:
        return qcore.spin_rotation(np.asarray(self.axis, float), self.rotation_angle(), dof)


@dataclass(frozen=True)
class RfFlipperSpec:
    """Resonant RF flipper (rotating-wave level): full flip or pi/2 mode.

    The oscillating-field phase phi enters the flipped amplitude as
    e^{+i phi} on down-conversion and e^{-i phi} on up-conversion.
    """

    omega: float               # rad/s
    phi: float = 0.0           # RF phase, rad
    b0: float = None           # static field, T
    b1: float = None           # rotating amplitude, T
    tau: float = None          # transit time, s
    mode: str = "full"         # "full" | "half"
    strict: bool = False
    resonance_rtol: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("full", "half"):
            raise ValueError("mode must be 'full' or 'half'")

    def check_resonance(self):
        """Warn (or raise in strict mode) when off frequency- or amplitude-resonance."""
        if self.b0 is not None:
            w_res = rf_resonance(self.b0, self.b1 or 0.0)
            if abs(self.omega - w_res) > self.resonance_rtol * w_res:
                msg = (f"RF frequency {self.omega:.6g} rad/s off resonance "
                       f"{w_res:.6g} rad/s")
                if self.strict:
                    raise ValueError(msg)
                warnings.warn(msg, stacklevel=2)
        if self.b1 is not None and self.tau is not None:
            target = math.pi * CONSTANTS.hbar / (2.0 * self.tau * abs(CONSTANTS.mu))
            if self.mode == "half":
                target /= 2.0
            if abs(self.b1 - target) > self.resonance_rtol * target:
                msg = (f"RF amplitude {self.b1:.6g} T off the amplitude-resonance "
                       f"{target:.6g} T for mode {self.mode!r}")
                if self.strict:
                    raise ValueError(msg)
                warnings.warn(msg, stacklevel=2)


@dataclass(frozen=True)
class AbsorberSpec:
    """Stochastic (foil) or deterministic (chopper) absorber of transmissivity T."""

    kind: str
    transmissivity: float

    def __post_init__(self):
        if self.kind not in ("stochastic", "deterministic"):
            raise ValueError("absorber kind must be 'stochastic' or 'deterministic'")
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")


@dataclass(frozen=True)
class GravityTiltSpec:
    """Interferometer tilt geometry: height difference deltaH_max * sin(tilt)."""

    path_length: float      # m
    delta_h_max: float      # m
    tilt: float = 0.0       # rad

    def __post_init__(self):
        if self.path_length <= 0 or self.delta_h_max <= 0:
            raise ValueError("geometry lengths must be positive")

    def delta_h(self) -> float:
        return self.delta_h_max * math.sin(self.tilt)


# ---------------------------------------------------------------------------
# closed-form element physics

def phase_shifter_chi(number_density, b_c, wavelength, thickness) -> float:
    """Slab phase chi = -N b_c lambda D."""
    for name, v in (("number_density", number_density), ("thickness", thickness)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    return -number_density * b_c * wavelength * thickness


def larmor_angle(b_field, length, velocity, constants=CONSTANTS) -> float:
    """Larmor rotation angle alpha = -(2 mu / hbar) B L / v (sign of mu < 0)."""
    if velocity <= 0:
        raise ValueError("velocity must be positive")
    return -(2.0 * constants.mu / constants.hbar) * b_field * length / velocity


def larmor_angle_from_integral(field_integral, velocity, constants=CONSTANTS) -> float:
    """Larmor angle from a field integral (T m): alpha = -(2 mu/hbar) * BL / v."""
    if velocity <= 0:
        raise ValueError("velocity must be positive")
    return -(2.0 * constants.mu / constants.hbar) * field_integral / velocity


def rf_resonance(b0, b1=0.0, constants=CONSTANTS) -> float:
    """Bloch-Siegert corrected resonance 2|mu|B0/hbar [1 + B1^2/(16 B0^2)]."""
    if b0 <= 0:
        raise ValueError("static field B0 must be positive")
    bare = 2.0 * abs(constants.mu) * b0 / constants.hbar
    return bare * (1.0 + b1 ** 2 / (16.0 * b0 ** 2))


def zero_field_phase(omega, distance, velocity) -> float:
    """Zero-field precession phase gamma = omega * (distance / velocity)."""
    if velocity <= 0:
        raise ValueError("velocity must be positive")
    return omega * distance / velocity


def zeeman_split(k0, b0, constants=CONSTANTS) -> float:
    """Momentum shift Delta k = m |mu| B0 / (hbar^2 k0); k_pm = k0 -+ Delta k."""
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    return constants.mass * abs(constants.mu) * abs(b0) / (constants.hbar ** 2 * k0)


def gravity_phase(wavelength, path_length, delta_h, constants=CONSTANTS) -> float:
    """Gravitational phase -2 pi lambda m^2 g L deltaH / h^2."""
    if wavelength < 0 or path_length < 0:
        raise ValueError("geometry inputs must be non-negative")
    return (-2.0 * math.pi * wavelength * constants.mass ** 2 * constants.g
            * path_length * delta_h / constants.h ** 2)


def ac_phase(e_field, path_length, constants=CONSTANTS) -> float:
    """Relative Aharonov-Casher phase 2 |mu| E l / (hbar c^2), velocity-independent.

    The per-path, spin-dependent phase is half of this with sign sigma = +-1;
    flipping electrode polarity (sign of E) flips the phase sign.
    """
    if path_length < 0:
        raise ValueError("path length must be non-negative")
    return 2.0 * abs(constants.mu) * e_field * path_length / (constants.hbar * constants.c ** 2)


# ---------------------------------------------------------------------------
# stateful element actions

def rf_flip(state, spec: RfFlipperSpec, spin_dof=SPIN, energy_dof=ENERGY):
    """Apply an on-resonance RF flipper to a state carrying spin and energy dofs.

    Full mode:  |up, E> -> e^{+i phi}|down, E - hbar w>,
                |down, E> -> e^{-i phi}|up, E + hbar w>.
    Half mode is the pi/2 Rabi map (1 - i F)/sqrt 2 with F the full-flip
    block: each input goes to the equal superposition with the flipped,
    energy-shifted component weighted by -i e^{+-i phi} (spin-energy
    entangler).  Raises on energy-ladder overflow.
    """
    spec.check_resonance()
    if spin_dof not in state.dofs or energy_dof not in state.dofs:
        raise ValueError("state must carry the spin and energy dofs")
    flip = _flip_matrix(energy_dof, spec.phi)
    if spec.mode == "full":
        mat = flip
    else:
        dim = flip.shape[0]
        mat = (np.eye(dim, dtype=complex) - 1j * flip) / math.sqrt(2)
    op = LinearOperator((spin_dof, energy_dof), mat)
    before = state.norm2() if isinstance(state, PureState) else state.trace()
    out = apply(op, state)
    after = out.norm2() if isinstance(out, PureState) else out.trace()
    if after < before - 1e-12:
        raise ValueError("energy-ladder overflow: flip would leave the truncated ladder")
    return out


def full_flip_operator(phi=0.0, spin_dof=SPIN, energy_dof=ENERGY) -> LinearOperator:
    """Bare spin-flip + ladder-shift operator block on (spin, energy).

    Unitary on the ladder interior; applying it to a state with support on
    the extreme rungs loses norm (checked by rf_flip).
    """
    return LinearOperator((spin_dof, energy_dof), _flip_matrix(energy_dof, phi))


def _flip_matrix(energy_dof, phi):
    """Spin-flip + ladder-shift generator block on (spin, energy)."""
    ne = energy_dof.dim
    lower = np.zeros((ne, ne), dtype=complex)  # |k-1><k|
    for k in range(1, ne):
        lower[k - 1, k] = 1.0
    raise_ = lower.conj().T
    down_up = np.array([[0, 0], [1, 0]], dtype=complex)  # |down><up|
    up_down = down_up.conj().T
    return (np.exp(1j * phi) * np.kron(down_up, lower)
            + np.exp(-1j * phi) * np.kron(up_down, raise_))


def stroboscopic_state(state: PureState, t, omega, energy_dof=ENERGY) -> PureState:
    """State seen by a time-resolved detector that does not resolve the ladder.

    At detection the energy components belong to the same spatial mode and
    add coherently with their free-evolution phases: the ladder axis is
    contracted with e^{-i k omega t}.  The result lives on the remaining
    dofs (scaled by 1/sqrt(ladder dim) to keep it sub-normalized);
    stroboscopic polarizations follow from the usual Bloch vector.
    """
    if energy_dof not in state.dofs:
        raise ValueError("state carries no energy dof")
    axis = state.dofs.index(energy_dof)
    dims = [d.dim for d in state.dofs]
    ks = np.arange(energy_dof.dim) - energy_dof.half_span
    phases = np.exp(-1j * ks * omega * t)
    tensor_amps = state.amps.reshape(dims)
    contracted = np.tensordot(tensor_amps, phases, axes=([axis], [0]))
    rest = tuple(d for d in state.dofs if d != energy_dof)
    return PureState(rest, contracted.ravel() / math.sqrt(energy_dof.dim))


def conditional_on_path(path_value, op: LinearOperator, path_dof=PATH) -> LinearOperator:
    """Apply ``op`` only on the given path branch (0 = I, 1 = II)."""
    proj_sel = np.zeros((2, 2), dtype=complex)
    proj_sel[path_value, path_value] = 1.0
    proj_other = np.eye(2, dtype=complex) - proj_sel
    dim = op.matrix.shape[0]
    mat = np.kron(proj_sel, op.matrix) + np.kron(proj_other, np.eye(dim, dtype=complex))
    return LinearOperator((path_dof,) + tuple(op.dofs), mat, unitary=op.unitary)


def absorber_channel(state, spec: AbsorberSpec, path_dof=PATH, absorbed_path=1):
    """Absorber acting on one path of a two-path state.

    Stochastic: single Kraus K = diag(1, sqrt T) on the path qubit (applied
    to pure or mixed states; the norm/trace drops by the absorbed weight).
    Deterministic: convex mixture T * rho_open + (1 - T) * rho_blocked where
    the blocked branch has the absorbed path projected out; always mixed.
    """
    t = spec.transmissivity
    if spec.kind == "stochastic":
        k = np.eye(2, dtype=complex)
        k[absorbed_path, absorbed_path] = math.sqrt(t)
        op = LinearOperator((path_dof,), k)
        return apply(op, state)
    rho = state.density() if isinstance(state, PureState) else state
    proj = np.eye(2, dtype=complex)
    proj[absorbed_path, absorbed_path] = 0.0
    block = embedded_matrix(LinearOperator((path_dof,), proj), rho.dofs)
    blocked = block @ rho.rho @ block.conj().T
    return MixedState(rho.dofs, t * rho.rho + (1.0 - t) * blocked)
