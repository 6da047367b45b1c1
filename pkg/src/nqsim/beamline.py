"""Interferometer and polarimeter topologies, propagation and exit intensities.

The path state space is the two-level {|I>, |II>} qubit; blade amplitudes
are free parameters.  Blade phases follow the symmetric beamsplitter
convention (reflection carries a factor i), which reproduces the standard
closed-form O/H fringe laws; intensities depend only on |r| and |t|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, qcore, rng
from .constants import wrap_phase
from .elements import (AbsorberSpec, BeamSplitterSpec, DcCoilSpec,
                       PhaseShifterSpec)
from .qcore import PATH, LinearOperator, MixedState, PureState


@dataclass(frozen=True)
class PortIntensities:
    """Exit intensities as fractions of the input intensity."""

    i_o: float
    i_h: float

    def __post_init__(self):
        for name, v in (("i_o", self.i_o), ("i_h", self.i_h)):
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name} = {v} outside [0, 1]")

    @property
    def total(self) -> float:
        return self.i_o + self.i_h


@dataclass(frozen=True)
class BeamlineTopology:
    """Two-path interferometer: splitter plus per-path ordered element lists.

    Elements may be PhaseShifterSpec, DcCoilSpec, AbsorberSpec or raw
    LinearOperators on internal dofs.  The scan phase shifter (delta_chi at
    propagation time) always acts on path II.
    """

    kind: str = "LLL"
    splitter: BeamSplitterSpec = field(default_factory=BeamSplitterSpec.balanced)
    path_i: tuple = ()
    path_ii: tuple = ()

    def __post_init__(self):
        if self.kind not in ("LLL", "skew-symmetric"):
            raise ValueError("propagating topology must be LLL or skew-symmetric")


def lll_intensities(r, t, delta_chi, path_i_op=None, path_ii_op=None,
                    in_state=None) -> PortIntensities:
    """Closed-form O/H intensities of a triple-Laue interferometer.

    With trivial path operators this evaluates
        I_O = 2 |r|^4 |t|^2 (1 + cos dchi)
        I_H = |t|^4 |r|^2 + |r|^6 - 2 |r|^4 |t|^2 cos dchi,
    and with spin-space path operators the general coherent superposition
    t r r U_I |psi> + e^{i dchi} r r t U_II |psi> (H-beam analogously).
    """
    rm, tm = abs(r), abs(t)
    if abs(rm ** 2 + tm ** 2 - 1.0) > 1e-10:
        raise ValueError("|r|^2 + |t|^2 must equal 1")
    if path_i_op is None and path_ii_op is None:
        cos = math.cos(delta_chi)
        i_o = 2.0 * rm ** 4 * tm ** 2 * (1.0 + cos)
        i_h = tm ** 4 * rm ** 2 + rm ** 6 - 2.0 * rm ** 4 * tm ** 2 * cos
        return PortIntensities(i_o, i_h)
    if in_state is None:
        in_state = qcore.spin_up()
    u_i = _embed_or_eye(path_i_op, in_state)
    u_ii = _embed_or_eye(path_ii_op, in_state)
    phase = cmath.exp(1j * delta_chi)
    psi_i, psi_ii = u_i @ in_state.amps, u_ii @ in_state.amps
    mirror = 1j * rm
    psi_o = (tm * mirror * (1j * rm)) * psi_i + phase * ((1j * rm) * mirror * tm) * psi_ii
    psi_h = (tm * mirror * tm) * psi_i + phase * ((1j * rm) * mirror * (1j * rm)) * psi_ii
    return PortIntensities(float(np.vdot(psi_o, psi_o).real),
                           float(np.vdot(psi_h, psi_h).real))


def _embed_or_eye(op, state):
    if op is None:
        return np.eye(state.dim, dtype=complex)
    if tuple(op.dofs) == tuple(state.dofs):
        return np.array(op.matrix)
    return qcore.embedded_matrix(op, state.dofs)


@dataclass(frozen=True)
class ExitBeams:
    """Exit states on the internal dofs (sub-normalized) plus intensities."""

    state_o: object
    state_h: object
    intensities: PortIntensities
    lost: float  # fraction transmitted away at the mirror blade


def _lower_element(elem, internal_dofs):
    """Element -> (scalar amplitude, operator matrix or None on internal dofs)."""
    if isinstance(elem, PhaseShifterSpec):
        return cmath.exp(1j * elem.chi()), None
    if isinstance(elem, DcCoilSpec):
        op = elem.operator()
        return 1.0, qcore.embedded_matrix(op, internal_dofs)
    if isinstance(elem, LinearOperator):
        return 1.0, qcore.embedded_matrix(elem, internal_dofs)
    raise TypeError(f"unsupported element {elem!r}")


def propagate(topology: BeamlineTopology, in_state, delta_chi=0.0) -> ExitBeams:
    """Propagate a state through a two-path interferometer.

    The exit state at each port is the coherent sum of the per-path
    amplitude chains; deterministic absorbers produce a convex mixture of
    open/blocked runs.  ``in_state`` carries the internal (spin, ...) dofs;
    mixed inputs are propagated eigenbranch-wise.
    """
    if isinstance(in_state, MixedState):
        evals, evecs = np.linalg.eigh(in_state.rho)
        runs = [(float(w), propagate(topology, PureState(in_state.dofs, v), delta_chi))
                for w, v in zip(evals, evecs.T) if w > 1e-15]
        return _mix_exits(runs, in_state.dofs)

    det = [(p, e) for p, elems in ((0, topology.path_i), (1, topology.path_ii))
           for e in elems if isinstance(e, AbsorberSpec) and e.kind == "deterministic"]
    if det:
        if len(det) > 1:
            raise ValueError("at most one deterministic absorber is supported")
        path, spec = det[0]
        strip = lambda elems: tuple(e for e in elems if not
                                    (isinstance(e, AbsorberSpec) and e.kind == "deterministic"))
        base = (topology.kind, topology.splitter, strip(topology.path_i), strip(topology.path_ii))
        open_run = propagate(BeamlineTopology(*base), in_state, delta_chi)
        blocked = AbsorberSpec("stochastic", 0.0)
        blocked_topo = BeamlineTopology(
            base[0], base[1],
            base[2] + ((blocked,) if path == 0 else ()),
            base[3] + ((blocked,) if path == 1 else ()))
        blocked_run = propagate(blocked_topo, in_state, delta_chi)
        t = spec.transmissivity
        return _mix_exits([(t, open_run), (1.0 - t, blocked_run)], in_state.dofs)

    rm, tm = abs(topology.splitter.r), abs(topology.splitter.t)
    dofs = in_state.dofs
    branches = []
    lost = 0.0
    for path, elems in ((0, topology.path_i), (1, topology.path_ii)):
        scalar = complex(tm) if path == 0 else 1j * rm   # blade 1
        psi = np.array(in_state.amps)
        for e in elems:
            if isinstance(e, AbsorberSpec):              # stochastic only here
                scalar *= math.sqrt(e.transmissivity)
                continue
            s, m = _lower_element(e, dofs)
            scalar *= s
            if m is not None:
                psi = m @ psi
        if path == 1:
            scalar *= cmath.exp(1j * delta_chi)          # scan phase on path II
        lost += abs(scalar) ** 2 * float(np.vdot(psi, psi).real) * tm ** 2
        scalar *= 1j * rm                                # mirror reflection
        branches.append(scalar * psi)

    psi_i, psi_ii = branches
    psi_o = (1j * rm) * psi_i + tm * psi_ii              # blade 3
    psi_h = tm * psi_i + (1j * rm) * psi_ii
    out_o, out_h = PureState(dofs, psi_o), PureState(dofs, psi_h)
    ports = PortIntensities(out_o.norm2(), out_h.norm2())
    return ExitBeams(out_o, out_h, ports, lost)


def _mix_exits(runs, dofs):
    dim = int(np.prod([d.dim for d in dofs]))
    rho_o = np.zeros((dim, dim), dtype=complex)
    rho_h = np.zeros_like(rho_o)
    i_o = i_h = lost = 0.0
    for w, run in runs:
        so, sh = run.state_o, run.state_h
        rho_o += w * (so.density().rho if isinstance(so, PureState) else so.rho)
        rho_h += w * (sh.density().rho if isinstance(sh, PureState) else sh.rho)
        i_o += w * run.intensities.i_o
        i_h += w * run.intensities.i_h
        lost += w * run.lost
    return ExitBeams(MixedState(dofs, rho_o), MixedState(dofs, rho_h),
                     PortIntensities(i_o, i_h), lost)


# ---------------------------------------------------------------------------
# polarimeter

PHASE_MARK = "phase"


def ramsey_probabilities(alpha) -> tuple:
    """Closed form for the canonical Ramsey sequence: P(up/down) = (1 +- sin a)/2."""
    return (0.5 * (1.0 + math.sin(alpha)), 0.5 * (1.0 - math.sin(alpha)))


def run_polarimeter(alpha, sequence=None, in_state=None) -> tuple:
    """Spin up/down probabilities after a polarimeter sequence with phase ``alpha``.

    The canonical (default) sequence is a pi/2 splitting rotation, the
    tunable relative phase ``alpha`` between the spin eigenstates, and a
    pi/2 analysis rotation about x, reproducing P(up/down) =
    (1 +- sin alpha)/2.  A custom ``sequence`` lists spin operators or
    DcCoilSpec with the string "phase" marking the alpha insertion point;
    it is evaluated by state propagation.
    """
    if sequence is None:
        sequence = [qcore.spin_rotation((0, 1, 0), math.pi / 2), PHASE_MARK,
                    qcore.spin_rotation((1, 0, 0), math.pi / 2)]
    state = in_state if in_state is not None else qcore.spin_up()
    for elem in sequence:
        if isinstance(elem, str) and elem == PHASE_MARK:
            op = qcore.spin_rotation((0, 0, 1), alpha)  # e^{i alpha} on |down>, mod global phase
        elif isinstance(elem, DcCoilSpec):
            op = elem.operator()
        elif isinstance(elem, LinearOperator):
            op = elem
        else:
            raise TypeError(f"unsupported polarimeter element {elem!r}")
        state = qcore.apply(op, state)
    p_up = qcore.expectation(state, qcore.projector_bloch(0.0, 0.0))
    return (p_up, 1.0 - p_up)


# ---------------------------------------------------------------------------
# four-blade vibration toy model

# Mach-Zehnder (3 blades) picks up a net kick for slowly varying mirror
# velocity; the crossed-path geometry (4 blades) compensates it.
_BLADE_SIGNS = {3: (1.0, -1.0, 1.0), 4: (1.0, -1.0, -1.0, 1.0)}


def _vibration_net_phases(n_blades, vibration_freq, kick_amplitude,
                          transit_time, n_runs, seed) -> np.ndarray:
    signs = np.array(_BLADE_SIGNS[n_blades])
    times = np.linspace(0.0, transit_time, n_blades)
    phi0 = 2.0 * math.pi * rng.uniform_array(seed, n_runs)
    phases = phi0[:, None] + 2.0 * math.pi * vibration_freq * times[None, :]
    return kick_amplitude * (np.cos(phases) @ signs)


def four_blade_contrast(vibration_freq, kick_amplitude, transit_time,
                        n_runs, seed, n_scan=24) -> tuple:
    """Monte Carlo fringe contrasts (three-blade, four-blade) under vibration.

    The mirror assembly moves sinusoidally with a uniformly random initial
    phase per neutron; each blade reflection kicks the interference phase
    in proportion to the instantaneous mirror velocity.  Returns the fitted
    contrast of the averaged fringe for both operating modes.
    """
    if n_runs < 100:
        raise ValueError("n_runs must be at least 100")
    out = []
    for blades in (3, 4):
        net = _vibration_net_phases(blades, vibration_freq, kick_amplitude,
                                    transit_time, n_runs,
                                    rng.derive_key(seed, f"{blades}blade"))
        xs = np.linspace(0.0, 2.0 * math.pi, n_scan, endpoint=False)
        intensity = 0.5 * (1.0 + np.cos(xs[None, :] + net[:, None])).mean(axis=0)
        fit = analysis.fit_fringe(xs, intensity * 1e6)
        out.append(min(1.0, fit.contrast))
    return tuple(out)


# ---------------------------------------------------------------------------
# coupled interferometer loops

def coupled_loop_state(chi1, a, chi2) -> PureState:
    """Exit-side superposition of a coupled-loop interferometer.

    Loop A (inner, balanced splitters) carries the path-qubit evolution set
    by phase ``chi1`` and absorber transmissivity ``a``; the outer
    reference branch carries phase ``chi2``.  The two-component output is
    sub-normalized by the absorber loss.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("loop transmissivity must lie in [0, 1]")
    loop_amp = (1.0 + math.sqrt(a) * cmath.exp(1j * chi1)) / 2.0
    amps = np.array([loop_amp, cmath.exp(1j * chi2)]) / math.sqrt(2.0)
    return PureState((PATH,), amps)


def coupled_loop_phases(chi1, a) -> tuple:
    """(pancharatnam, geometric, visibility) of the loop-A evolution.

    Pancharatnam phase: arg<ref|evolved> of the inner path qubit, with
    visibility |<ref|evolved>|.  The geometric part subtracts the
    equatorial half-phase chi1/2 and equals -Omega/2 of the surface
    enclosed by the traced path plus its geodesic closure.
    """
    z = (1.0 + math.sqrt(a) * cmath.exp(1j * chi1)) / 2.0
    pan = cmath.phase(z)
    geo = wrap_phase(pan - chi1 / 2.0)
    return pan, geo, abs(z)


def cyclic_equatorial_pancharatnam(n_steps=720) -> float:
    """Pancharatnam phase along a full equatorial loop, tracked continuously.

    Summing arg<psi_k|psi_{k+1}> over the loop carries the phase through
    the visibility node at chi = pi and lands on -Omega/2 (mod 2 pi) for
    the hemisphere, i.e. the two-level 4 pi sign.
    """
    chis = np.linspace(0.0, 2.0 * math.pi, n_steps + 1)
    total = 0.0
    for k in range(n_steps):
        z0 = np.array([1.0, cmath.exp(1j * chis[k])]) / math.sqrt(2)
        z1 = np.array([1.0, cmath.exp(1j * chis[k + 1])]) / math.sqrt(2)
        total += cmath.phase(np.vdot(z0, z1))
    return total
