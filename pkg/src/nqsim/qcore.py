"""States, operators and propagators on small labelled tensor-product spaces.

Every state lives on an ordered tuple of two-level (or small-ladder)
degrees of freedom.  Spin and path share the same qubit algebra; the
total-energy ladder is a truncated (2k+1)-level system.  Everything is
dense complex128 and immutable: operations return new objects.

Conventions
-----------
* spin: index 0 = up, 1 = down (quantization along +z)
* path: index 0 = |I>, 1 = |II>
* momentum: index 0 = |k+>, 1 = |k->
* energy: array index k + half_span holds ladder level E0 + k*hbar*omega
* rotations: U(angle, axis) = exp(-i sigma.axis * angle / 2)
* phases are reported in (-pi, pi]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS

STRUCTURAL_TOL = 1e-10   # hermiticity, projector/unitary flags
PROPAGATOR_TOL = 1e-9    # unitarity of composed time propagators
NORM_TOL = 1e-12         # norm bookkeeping slack

_QUBIT_KINDS = ("spin", "path", "momentum")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class DofLabel:
    """Label of one degree of freedom; (kind, id) pairs must be unique per state."""

    kind: str
    id: int = 0
    half_span: int = 2  # energy-ladder half width, ignored for qubit kinds

    def __post_init__(self):
        if self.kind not in _QUBIT_KINDS and self.kind != "energy":
            raise ValueError(f"unknown dof kind {self.kind!r}")
        if self.kind == "energy" and self.half_span < 1:
            raise ValueError("energy ladder needs half_span >= 1")

    @property
    def dim(self) -> int:
        if self.kind == "energy":
            return 2 * self.half_span + 1
        return 2

    def __repr__(self):
        return f"{self.kind}{self.id}"


SPIN = DofLabel("spin", 0)
PATH = DofLabel("path", 0)
ENERGY = DofLabel("energy", 0)
MOMENTUM = DofLabel("momentum", 0)


def _check_unique(dofs):
    seen = set()
    for d in dofs:
        key = (d.kind, d.id)
        if key in seen:
            raise ValueError(f"duplicate dof label {d!r}")
        seen.add(key)


def _freeze(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Possibly sub-normalized state vector over labelled dofs."""

    dofs: tuple
    amps: np.ndarray

    def __post_init__(self):
        dofs = tuple(self.dofs)
        _check_unique(dofs)
        amps = _freeze(self.amps)
        expected = int(np.prod([d.dim for d in dofs])) if dofs else 1
        if amps.shape != (expected,):
            raise ValueError(f"amplitude vector has length {amps.shape}, expected ({expected},)")
        n2 = float(np.vdot(amps, amps).real)
        if n2 > 1.0 + NORM_TOL:
            raise ValueError(f"state norm^2 = {n2} exceeds 1")
        object.__setattr__(self, "dofs", dofs)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "PureState":
        n = math.sqrt(self.norm2())
        if n < 1e-300:
            raise ValueError("cannot normalize a fully absorbed state")
        return PureState(self.dofs, self.amps / n)

    def density(self) -> "MixedState":
        return MixedState(self.dofs, np.outer(self.amps, self.amps.conj()))

    def overlap(self, other: "PureState") -> complex:
        if tuple(self.dofs) != tuple(other.dofs):
            raise ValueError("overlap requires identical dof layouts")
        return complex(np.vdot(self.amps, other.amps))


@dataclass(frozen=True)
class MixedState:
    """Density matrix over labelled dofs; trace may be < 1 after absorption."""

    dofs: tuple
    rho: np.ndarray

    def __post_init__(self):
        dofs = tuple(self.dofs)
        _check_unique(dofs)
        rho = _freeze(self.rho)
        expected = int(np.prod([d.dim for d in dofs])) if dofs else 1
        if rho.shape != (expected, expected):
            raise ValueError("density matrix shape does not match dofs")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(rho))):
            raise ValueError("density matrix is not Hermitian")
        tr = float(np.trace(rho).real)
        if tr > 1.0 + NORM_TOL:
            raise ValueError(f"density matrix trace {tr} exceeds 1")
        eigs = np.linalg.eigvalsh(rho)
        if eigs.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min()}")
        object.__setattr__(self, "dofs", dofs)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.rho).real)


@dataclass(frozen=True)
class LinearOperator:
    """Square operator acting on a subset of dofs, with verified flags."""

    dofs: tuple
    matrix: np.ndarray
    unitary: bool = False
    hermitian: bool = False
    projector: bool = False
    tol: float = STRUCTURAL_TOL

    def __post_init__(self):
        dofs = tuple(self.dofs)
        _check_unique(dofs)
        mat = _freeze(self.matrix)
        expected = int(np.prod([d.dim for d in dofs]))
        if mat.shape != (expected, expected):
            raise ValueError("operator matrix shape does not match dofs")
        eye = np.eye(expected)
        if self.unitary and np.max(np.abs(mat.conj().T @ mat - eye)) > self.tol:
            raise ValueError("operator flagged unitary but U^dag U != 1")
        if self.hermitian and np.max(np.abs(mat - mat.conj().T)) > self.tol:
            raise ValueError("operator flagged hermitian but A != A^dag")
        if self.projector and np.max(np.abs(mat @ mat - mat)) > self.tol:
            raise ValueError("operator flagged projector but P^2 != P")
        object.__setattr__(self, "dofs", dofs)
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.dofs, self.matrix.conj().T, unitary=self.unitary,
                              hermitian=self.hermitian, projector=self.projector, tol=self.tol)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if tuple(self.dofs) != tuple(other.dofs):
            raise ValueError("operator composition requires identical dof layouts")
        return LinearOperator(self.dofs, self.matrix @ other.matrix,
                              unitary=self.unitary and other.unitary)


@dataclass(frozen=True)
class BlochVector:
    px: float
    py: float
    pz: float

    def __post_init__(self):
        if self.length > 1.0 + 1e-10:
            raise ValueError(f"Bloch vector length {self.length} exceeds 1")

    @property
    def length(self) -> float:
        return math.sqrt(self.px ** 2 + self.py ** 2 + self.pz ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])


# ---------------------------------------------------------------------------
# constructors

def ket(dofs, indices) -> PureState:
    """Basis state with amplitude 1 at the given per-dof indices."""
    dofs = tuple(dofs)
    dims = [d.dim for d in dofs]
    amps = np.zeros(int(np.prod(dims)) if dofs else 1, dtype=complex)
    amps[int(np.ravel_multi_index(tuple(indices), dims))] = 1.0
    return PureState(dofs, amps)


def spin_up(dof=SPIN) -> PureState:
    return ket((dof,), (0,))


def spin_down(dof=SPIN) -> PureState:
    return ket((dof,), (1,))


def spin_state(theta, phi, dof=SPIN) -> PureState:
    """cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>."""
    amps = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    return PureState((dof,), amps)


def equal_superposition(phase=0.0, dof=PATH) -> PureState:
    """(|0> + e^{i phase}|1>)/sqrt 2 on a two-level dof."""
    return PureState((dof,), np.array([1.0, np.exp(1j * phase)]) / math.sqrt(2))


def energy_level(k=0, dof=ENERGY) -> PureState:
    """Ladder eigenstate E0 + k*hbar*omega."""
    if abs(k) > dof.half_span:
        raise ValueError(f"ladder index {k} outside +-{dof.half_span}")
    return ket((dof,), (k + dof.half_span,))


# ---------------------------------------------------------------------------
# rotations and projectors

def rotation_matrix(axis, angle) -> np.ndarray:
    """exp(-i sigma.axis angle/2) = cos(angle/2) 1 - i sin(angle/2) sigma.axis."""
    axis = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be a unit vector, |axis| = {norm}")
    sig = axis[0] * SIGMA_X + axis[1] * SIGMA_Y + axis[2] * SIGMA_Z
    half = angle / 2.0
    return math.cos(half) * ID2 - 1j * math.sin(half) * sig


def spin_rotation(axis, angle, dof=SPIN) -> LinearOperator:
    """Unitary spin rotation about a unit axis; 4pi-periodic in angle."""
    return LinearOperator((dof,), rotation_matrix(axis, angle), unitary=True)


def pauli(which, dof=SPIN) -> LinearOperator:
    return LinearOperator((dof,), PAULI[which], unitary=True, hermitian=True)


def projector_bloch(theta, phi, dof=SPIN) -> LinearOperator:
    """Rank-1 projector onto the Bloch direction (theta, phi)."""
    s = spin_state(theta, phi, dof)
    return LinearOperator((dof,), np.outer(s.amps, s.amps.conj()),
                          hermitian=True, projector=True)


def path_projector(chi, sign=+1, dof=PATH) -> LinearOperator:
    """Projector onto (|I> + sign e^{i chi}|II>)/sqrt 2."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.array([1.0, sign * np.exp(1j * chi)]) / math.sqrt(2)
    return LinearOperator((dof,), np.outer(amps, amps.conj()),
                          hermitian=True, projector=True)


def equatorial_projector(angle, sign=+1, dof=SPIN) -> LinearOperator:
    """Projector onto (|0> + sign e^{i angle}|1>)/sqrt 2 for any qubit dof."""
    amps = np.array([1.0, sign * np.exp(1j * angle)]) / math.sqrt(2)
    return LinearOperator((dof,), np.outer(amps, amps.conj()),
                          hermitian=True, projector=True)


# ---------------------------------------------------------------------------
# tensor algebra

def tensor(a, b):
    """Kronecker product of two states or two operators with disjoint dofs."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        dofs = a.dofs + b.dofs
        _check_unique(dofs)
        return PureState(dofs, np.kron(a.amps, b.amps))
    if isinstance(a, MixedState) and isinstance(b, MixedState):
        dofs = a.dofs + b.dofs
        _check_unique(dofs)
        return MixedState(dofs, np.kron(a.rho, b.rho))
    if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
        dofs = a.dofs + b.dofs
        _check_unique(dofs)
        return LinearOperator(dofs, np.kron(a.matrix, b.matrix),
                              unitary=a.unitary and b.unitary,
                              hermitian=a.hermitian and b.hermitian,
                              projector=a.projector and b.projector)
    raise TypeError("tensor arguments must be two states or two operators of the same kind")


def _axes_of(op_dofs, state_dofs):
    try:
        return [state_dofs.index(d) for d in op_dofs]
    except ValueError as exc:
        raise ValueError(f"operator dof not present in state: {exc}") from exc


def embedded_matrix(op: LinearOperator, dofs) -> np.ndarray:
    """Matrix of op extended by identity to the full dof layout."""
    dofs = tuple(dofs)
    axes = _axes_of(op.dofs, dofs)
    dims = [d.dim for d in dofs]
    if axes == list(range(len(dims))):
        return np.array(op.matrix)
    rest = [i for i in range(len(dims)) if i not in axes]
    rest_dim = int(np.prod([dims[i] for i in rest])) if rest else 1
    m = np.kron(op.matrix, np.eye(rest_dim, dtype=complex))
    # pos[j] = original basis index of the j-th basis vector in the
    # (op dofs first, rest after) permuted layout
    pos = np.arange(int(np.prod(dims))).reshape(dims).transpose(axes + rest).ravel()
    out = np.empty_like(m)
    out[np.ix_(pos, pos)] = m
    return out


def apply(op: LinearOperator, state):
    """Apply an operator to a state, embedding with identity on other dofs."""
    if isinstance(state, PureState):
        mat = embedded_matrix(op, state.dofs)
        return PureState(state.dofs, mat @ state.amps)
    if isinstance(state, MixedState):
        mat = embedded_matrix(op, state.dofs)
        return MixedState(state.dofs, mat @ state.rho @ mat.conj().T)
    raise TypeError("state must be PureState or MixedState")


def expectation(state, obs: LinearOperator) -> float:
    """<A> on a (sub-normalized) state; requires a Hermitian observable."""
    if not obs.hermitian:
        if np.max(np.abs(obs.matrix - obs.matrix.conj().T)) > STRUCTURAL_TOL:
            raise ValueError("observable must be Hermitian")
    mat = embedded_matrix(obs, state.dofs)
    if isinstance(state, PureState):
        n2 = state.norm2()
        if n2 < 1e-300:
            raise ValueError("expectation on a fully absorbed state")
        val = complex(np.vdot(state.amps, mat @ state.amps)) / n2
    else:
        tr = state.trace()
        if tr < 1e-300:
            raise ValueError("expectation on a zero-trace state")
        val = complex(np.trace(mat @ state.rho)) / tr
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value not real: {val}")
    return float(val.real)


def partial_trace(state, keep) -> MixedState:
    """Reduced density matrix on the dofs listed in ``keep`` (in that order)."""
    keep = tuple(keep)
    if isinstance(state, PureState):
        rho_full = np.outer(state.amps, state.amps.conj())
        dofs = state.dofs
    else:
        rho_full = state.rho
        dofs = state.dofs
    dims = [d.dim for d in dofs]
    n = len(dims)
    keep_axes = _axes_of(keep, dofs)
    t = rho_full.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep_axes]
    for off, ax in enumerate(sorted(drop)):
        a = ax - off
        t = np.trace(t, axis1=a, axis2=a + (n - off))
    # axes now ordered as the surviving dofs in original order
    survivors = [d for d in dofs if d in keep]
    kd = [d.dim for d in survivors]
    m = int(np.prod(kd))
    t = t.reshape(m, m)
    if survivors != list(keep):
        perm = [survivors.index(d) for d in keep]
        tt = t.reshape(kd + kd)
        tt = np.transpose(tt, perm + [p + len(kd) for p in perm])
        t = tt.reshape(m, m)
    return MixedState(keep, t)


def bloch_vector(state, dof=SPIN) -> BlochVector:
    """Pauli expectation values of one qubit dof, normalized by the trace."""
    if dof.dim != 2:
        raise ValueError("bloch_vector requires a two-level dof")
    red = partial_trace(state, (dof,))
    tr = red.trace()
    if tr < 1e-300:
        raise ValueError("fully absorbed beam: zero trace, no polarization defined")
    rho = red.rho / tr
    return BlochVector(
        float(np.trace(rho @ SIGMA_X).real),
        float(np.trace(rho @ SIGMA_Y).real),
        float(np.trace(rho @ SIGMA_Z).real),
    )


def schmidt_coefficients(state: PureState, first) -> np.ndarray:
    """Schmidt coefficients across the bipartition (first | rest)."""
    first = tuple(first)
    rest = tuple(d for d in state.dofs if d not in first)
    axes = _axes_of(first, state.dofs) + _axes_of(rest, state.dofs)
    dims = [d.dim for d in state.dofs]
    t = state.amps.reshape(dims).transpose(axes)
    da = int(np.prod([d.dim for d in first]))
    return np.linalg.svd(t.reshape(da, -1), compute_uv=False)


def schmidt_rank(state: PureState, first, tol=1e-10) -> int:
    return int(np.sum(schmidt_coefficients(state, first) > tol))


# ---------------------------------------------------------------------------
# mixed-state helpers

def mixed_from_bloch(r, n, dof=SPIN) -> MixedState:
    """rho = (1 + r n.sigma)/2 for purity r in [0, 1] and unit vector n."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("purity r must lie in [0, 1]")
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("Bloch direction must be a unit vector")
    rho = 0.5 * (ID2 + r * (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z))
    return MixedState((dof,), rho)


def mix(states, weights) -> MixedState:
    """Convex mixture of states (pure or mixed) with non-negative weights."""
    weights = [float(w) for w in weights]
    if any(w < 0 for w in weights):
        raise ValueError("mixture weights must be non-negative")
    if sum(weights) > 1.0 + NORM_TOL:
        raise ValueError("mixture weights must sum to at most 1")
    if not states:
        raise ValueError("empty mixture")
    dofs = tuple(states[0].dofs)
    rho = np.zeros((int(np.prod([d.dim for d in dofs])),) * 2, dtype=complex)
    for s, w in zip(states, weights):
        if tuple(s.dofs) != dofs:
            raise ValueError("all mixture components need the same dof layout")
        rho = rho + w * (s.density().rho if isinstance(s, PureState) else s.rho)
    return MixedState(dofs, rho)


def purity(state, dof=SPIN) -> float:
    """Polarization magnitude |<sigma>| of a spin qubit."""
    return bloch_vector(state, dof).length


# ---------------------------------------------------------------------------
# time propagation

def time_propagate(field, t0, t1, steps, *, constants=CONSTANTS, dof=SPIN,
                   tol=PROPAGATOR_TOL) -> LinearOperator:
    """Ordered product of per-step exponentials for H = -mu sigma.B(t).

    The field is sampled at step midpoints, so piecewise-constant segments
    are exact and smooth fields converge at O(dt^2).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = (t1 - t0) / steps
    u = ID2.copy()
    pref = constants.mu * dt / constants.hbar
    for k in range(steps):
        b = np.asarray(field(t0 + (k + 0.5) * dt), dtype=float)
        bmag = float(np.linalg.norm(b))
        if not np.isfinite(bmag):
            raise ValueError("field must be finite on [t0, t1]")
        if bmag == 0.0:
            continue
        a = pref * bmag  # exp(+i a sigma.n), a = mu |B| dt / hbar
        n = b / bmag
        sig = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
        u = (math.cos(a) * ID2 + 1j * math.sin(a) * sig) @ u
    return LinearOperator((dof,), u, unitary=True, tol=tol)
