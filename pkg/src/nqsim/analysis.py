"""Count statistics, fringe fitting, and inequality/uncertainty evaluators."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import qcore, rng
from .constants import wrap_phase
from .qcore import LinearOperator, MixedState, PureState

FULL_TURN = 2.0 * math.pi


# ---------------------------------------------------------------------------
# count statistics

def sample_counts(intensity, mean_counts, seed, index) -> int:
    """Poisson count with mean intensity * mean_counts, deterministic in (seed, index)."""
    if intensity < 0 or mean_counts < 0:
        raise ValueError("intensity and mean_counts must be non-negative")
    return rng.poisson(intensity * mean_counts, seed, index)


@dataclass(frozen=True)
class FringeScan:
    """Swept-parameter count data for one interference scan."""

    param: str
    xs: np.ndarray
    counts_o: np.ndarray
    counts_h: np.ndarray = None
    intensity_o: np.ndarray = None
    intensity_h: np.ndarray = None
    mean_counts: float = 0.0
    seed: int = 0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if np.any(np.diff(xs) <= 0):
            raise ValueError("scan positions must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        for name in ("counts_o", "counts_h", "intensity_o", "intensity_h"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr)
            if arr.shape != xs.shape:
                raise ValueError(f"{name} length does not match xs")
            object.__setattr__(self, name, arr)


def sampled_scan(param, xs, intensity_o, intensity_h=None, mean_counts=1e4,
                 seed=0) -> FringeScan:
    """Build a FringeScan by Poisson-sampling per-point intensities.

    Point i draws at counter index 2i (O) and 2i+1 (H) of the seed stream,
    so scans are reproducible and order-independent.
    """
    intensity_o = np.asarray(intensity_o, dtype=float)
    counts_o = np.array([sample_counts(v, mean_counts, seed, 2 * i)
                         for i, v in enumerate(intensity_o)])
    counts_h = None
    if intensity_h is not None:
        intensity_h = np.asarray(intensity_h, dtype=float)
        counts_h = np.array([sample_counts(v, mean_counts, seed, 2 * i + 1)
                             for i, v in enumerate(intensity_h)])
    return FringeScan(param, np.asarray(xs, float), counts_o, counts_h,
                      intensity_o, intensity_h, mean_counts, seed)


# ---------------------------------------------------------------------------
# fringe fitting

@dataclass(frozen=True)
class FitResult:
    """First-harmonic weighted least-squares fit I = a0 (1 + C cos(x + phase))."""

    offset: float
    amplitude: float
    phase: float
    contrast: float
    offset_err: float = 0.0
    amplitude_err: float = 0.0
    phase_err: float = 0.0
    contrast_err: float = 0.0
    chi_square: float = 0.0
    ndf: int = 0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("offset", "amplitude", "phase", "contrast", "offset_err",
                 "amplitude_err", "phase_err", "contrast_err", "chi_square", "ndf")}


def fit_fringe(xs, counts=None, weights=None) -> FitResult:
    """Weighted LSQ of a0 + a_c cos x + a_s sin x against count data.

    Accepts a FringeScan (fits the O counts) or explicit (xs, counts).
    Weights default to 1/max(count, 1) (Poisson).  Amplitude is
    sqrt(a_c^2 + a_s^2) >= 0 and phase = atan2(-a_s, a_c), i.e. the
    convention I propto 1 + C cos(x + phase).
    """
    if isinstance(xs, FringeScan):
        scan = xs
        xs, counts = scan.xs, scan.counts_o
    xs = np.asarray(xs, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if xs.size < 5:
        raise ValueError("fringe fit needs at least 5 points")
    if xs.max() - xs.min() < 0.9 * FULL_TURN:
        raise ValueError("fringe fit needs points spanning at least one period")
    if weights is None:
        weights = 1.0 / np.maximum(counts, 1.0)
    design = np.column_stack([np.ones_like(xs), np.cos(xs), np.sin(xs)])
    wd = design * weights[:, None]
    normal = design.T @ wd
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > 1e10:
        raise ValueError("degenerate design matrix: scan points do not resolve the fringe")
    beta = np.linalg.solve(normal, wd.T @ counts)
    cov = np.linalg.inv(normal)
    a0, ac, as_ = beta
    resid = counts - design @ beta
    chi2 = float(np.sum(weights * resid ** 2))
    amp = math.hypot(ac, as_)
    phase = math.atan2(-as_, ac)
    # delta-method errors for amplitude, phase, contrast
    if amp > 0:
        g_amp = np.array([0.0, ac / amp, as_ / amp])
        g_phase = np.array([0.0, as_ / amp ** 2, -ac / amp ** 2])
    else:
        g_amp = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
        g_phase = np.zeros(3)
    amp_err = math.sqrt(max(0.0, g_amp @ cov @ g_amp))
    phase_err = math.sqrt(max(0.0, g_phase @ cov @ g_phase))
    contrast = amp / a0 if a0 != 0 else math.inf
    if a0 != 0:
        g_c = np.array([-amp / a0 ** 2, 0.0, 0.0]) + g_amp / a0
        contrast_err = math.sqrt(max(0.0, g_c @ cov @ g_c))
    else:
        contrast_err = math.inf
    return FitResult(float(a0), float(amp), float(phase), float(contrast),
                     float(math.sqrt(max(0.0, cov[0, 0]))), float(amp_err),
                     float(phase_err), float(contrast_err), chi2, int(xs.size - 3))


def fit_fringe_frequency(xs, counts, freq_guess=1.0):
    """Fit a0 + a1 cos(w x + phase) with free angular frequency w.

    Linear LSQ at fixed w, refined over w by golden-section search on the
    weighted residual; the frequency error comes from the local curvature
    of chi^2(w).  Returns (period, period_err, FitResult at the optimum).
    """
    xs = np.asarray(xs, dtype=float)
    counts = np.asarray(counts, dtype=float)
    weights = 1.0 / np.maximum(counts, 1.0)

    def chi2_at(w):
        design = np.column_stack([np.ones_like(xs), np.cos(w * xs), np.sin(w * xs)])
        wd = design * weights[:, None]
        beta = np.linalg.solve(design.T @ wd, wd.T @ counts)
        r = counts - design @ beta
        return float(np.sum(weights * r ** 2)), beta

    # bracket the optimum on a grid around the guess, then golden-section
    grid = freq_guess * np.linspace(0.5, 1.5, 81)
    chis = [chi2_at(w)[0] for w in grid]
    k = int(np.argmin(chis))
    lo, hi = grid[max(0, k - 1)], grid[min(len(grid) - 1, k + 1)]
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = chi2_at(c)[0], chi2_at(d)[0]
    for _ in range(200):
        if b - a < 1e-12 * freq_guess:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = chi2_at(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = chi2_at(d)[0]
    w = 0.5 * (a + b)
    chi0, beta = chi2_at(w)
    # curvature of chi^2 about the optimum: sigma_w^2 = 2 / chi2''
    h = max(1e-7 * w, 1e-12)
    chip = chi2_at(w + h)[0]
    chim = chi2_at(w - h)[0]
    curv = (chip + chim - 2 * chi0) / h ** 2
    w_err = math.sqrt(2.0 / curv) if curv > 0 else math.inf
    design = np.column_stack([np.ones_like(xs), np.cos(w * xs), np.sin(w * xs)])
    a0, ac, as_ = beta
    amp = math.hypot(ac, as_)
    fit = FitResult(float(a0), float(amp), math.atan2(-as_, ac),
                    float(amp / a0) if a0 else math.inf,
                    chi_square=chi0, ndf=int(xs.size - 4))
    period = FULL_TURN / w
    period_err = FULL_TURN * w_err / w ** 2
    return period, period_err, fit


# ---------------------------------------------------------------------------
# correlations and inequalities

def expectation_from_counts(n_pp, n_qq, n_pq, n_qp):
    """Correlation E and Poisson error from the four coincidence counts.

    E = (N(a,c) + N(a',c') - N(a,c') - N(a',c)) / sum, primes denoting the
    settings shifted by pi.
    """
    counts = [n_pp, n_qq, n_pq, n_qp]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = float(sum(counts))
    if total <= 0:
        raise ValueError("zero total counts")
    diff = float(n_pp + n_qq - n_pq - n_qp)
    e = diff / total
    var = ((total - diff) ** 2 * (n_pp + n_qq) + (total + diff) ** 2 * (n_pq + n_qp)) / total ** 4
    return e, math.sqrt(var)


@dataclass(frozen=True)
class CorrelationSet:
    """Expectation values keyed by measurement-setting pairs."""

    values: dict = field(default_factory=dict)

    def add(self, key, e, sigma=0.0):
        if abs(e) > 1.0 + 3.0 * sigma + 1e-12:
            raise ValueError(f"|E| = {abs(e)} exceeds 1 beyond 3 sigma")
        self.values[key] = (float(e), float(sigma))

    def e(self, key) -> float:
        return self.values[key][0]

    def sigma(self, key) -> float:
        return self.values[key][1]


@dataclass(frozen=True)
class InequalityResult:
    name: str
    value: float
    bound: float
    sigma: float = 0.0
    violated: bool = False

    @staticmethod
    def build(name, value, bound, sigma=0.0) -> "InequalityResult":
        return InequalityResult(name, float(value), float(bound), float(sigma),
                                bool(value > bound))


def chsh(e11, e12, e21, e22, sigmas=None) -> InequalityResult:
    """CHSH sum S = E11 + E12 - E21 + E22 against the bound 2.

    Index 1/2 on the first slot is the spin setting (alpha1, alpha2), on
    the second the path/energy setting (chi1, chi2); the sign pattern is
    fixed so the ideal Bell state at alpha = (0, pi/2), chi = (pi/4, -pi/4)
    yields +2 sqrt 2.
    """
    for e in (e11, e12, e21, e22):
        if abs(e) > 1.0 + 1e-9:
            raise ValueError("correlations must lie in [-1, 1]")
    s = e11 + e12 - e21 + e22
    sigma = math.sqrt(sum(x ** 2 for x in sigmas)) if sigmas else 0.0
    return InequalityResult.build("CHSH", s, 2.0, sigma)


def ks_witness(e_xx, e_yy, e_prod, sigmas=None) -> InequalityResult:
    """Reduced Kochen-Specker witness against its non-contextual bound 1.

    Takes the three raw joint correlations <sx sx>, <sy sy> and the product
    observable <(sx sy).(sy sx)>; all three are -1 on the ideal state
    (|down,I> - |up,II>)/sqrt 2, and the witness combination
    -<sx sx> - <sy sy> - <(sx sy)(sy sx)> then reaches the quantum value 3.
    """
    value = -e_xx - e_yy - e_prod
    sigma = math.sqrt(sum(x ** 2 for x in sigmas)) if sigmas else 0.0
    return InequalityResult.build("Kochen-Specker", value, 1.0, sigma)


def leggett_bound(phi) -> float:
    """Contextual-realist bound 4 - (4/pi)|sin(phi/2)|."""
    return 4.0 - (4.0 / math.pi) * abs(math.sin(phi / 2.0))


def leggett_qm(phi) -> float:
    """Quantum prediction 2|1 + cos phi| for the Leggett sum."""
    return 2.0 * abs(1.0 + math.cos(phi))


def leggett(e1_phi, e1_0, e2_phi, e2_0, phi, sigmas=None) -> InequalityResult:
    """Leggett-like sum |E1(phi)+E1(0)| + |E2(phi)+E2(0)| vs its phi-dependent bound."""
    for e in (e1_phi, e1_0, e2_phi, e2_0):
        if abs(e) > 1.0 + 1e-9:
            raise ValueError("correlations must lie in [-1, 1]")
    s = abs(e1_phi + e1_0) + abs(e2_phi + e2_0)
    sigma = math.sqrt(sum(x ** 2 for x in sigmas)) if sigmas else 0.0
    return InequalityResult.build("Leggett", s, leggett_bound(phi), sigma)


def leggett_max_violation(n_grid=20001):
    """(phi, margin) maximizing the quantum value minus the Leggett bound."""
    phis = np.linspace(0.0, math.pi / 2, n_grid)
    margins = np.array([leggett_qm(p) - leggett_bound(p) for p in phis])
    k = int(np.argmax(margins))
    # golden-section refinement around the grid optimum
    a, b = phis[max(0, k - 1)], phis[min(n_grid - 1, k + 1)]
    invphi = (math.sqrt(5) - 1) / 2
    f = lambda p: -(leggett_qm(p) - leggett_bound(p))
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(120):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    phi = 0.5 * (a + b)
    return phi, leggett_qm(phi) - leggett_bound(phi)


def mermin(e_xxx, e_xyy, e_yxy, e_yyx, sigmas=None) -> InequalityResult:
    """Mermin sum M = E(xxx) - E(xyy) - E(yxy) - E(yyx) against the bound 2."""
    m = e_xxx - e_xyy - e_yxy - e_yyx
    sigma = math.sqrt(sum(x ** 2 for x in sigmas)) if sigmas else 0.0
    return InequalityResult.build("Mermin", m, 2.0, sigma)


# ---------------------------------------------------------------------------
# interferometric phases

UNDEFINED_VISIBILITY = 1e-12


@dataclass(frozen=True)
class PhaseResult:
    """Fringe-shift phase and visibility; ``defined`` is False at a node."""

    phase: float
    visibility: float
    defined: bool = True


def pancharatnam(psi: PureState, u: LinearOperator) -> PhaseResult:
    """Pancharatnam phase arg<psi|U|psi> and visibility |<psi|U|psi>|."""
    psi = psi.normalized()
    z = complex(np.vdot(psi.amps, qcore.embedded_matrix(u, psi.dofs) @ psi.amps))
    if abs(z) < UNDEFINED_VISIBILITY:
        return PhaseResult(0.0, abs(z), defined=False)
    return PhaseResult(wrap_phase(cmath.phase(z)), abs(z))


def off_diagonal_phase(psi_plus: PureState, psi_minus: PureState,
                       u: LinearOperator) -> PhaseResult:
    """Off-diagonal geometric phase arg(<+|U|-><-|U|+>) of an orthonormal pair."""
    if abs(psi_plus.overlap(psi_minus)) > 1e-10:
        raise ValueError("off-diagonal phase needs an orthonormal state pair")
    mat = qcore.embedded_matrix(u, psi_plus.dofs)
    z = (complex(np.vdot(psi_plus.amps, mat @ psi_minus.amps))
         * complex(np.vdot(psi_minus.amps, mat @ psi_plus.amps)))
    if abs(z) < UNDEFINED_VISIBILITY:
        return PhaseResult(0.0, abs(z), defined=False)
    return PhaseResult(wrap_phase(cmath.phase(z)), abs(z))


def mixed_state_phase(rho: MixedState, u: LinearOperator) -> PhaseResult:
    """Mixed-state phase arg tr(U rho) with visibility |tr(U rho)|.

    For rho = (1 + r sigma_z)/2 and U = exp(-i delta sigma_z) the magnitude
    of the phase is arctan(r tan delta).
    """
    if abs(rho.trace() - 1.0) > 1e-9:
        raise ValueError("mixed-state phase requires a unit-trace state")
    z = complex(np.trace(qcore.embedded_matrix(u, rho.dofs) @ rho.rho))
    if abs(z) < UNDEFINED_VISIBILITY:
        return PhaseResult(0.0, abs(z), defined=False)
    return PhaseResult(wrap_phase(cmath.phase(z)), abs(z))


def berry_solid_angle(theta_cone):
    """(solid angle, Berry phase) for a cone of opening angle theta.

    Omega = 2 pi (1 - cos theta); the adiabatic phase is -Omega/2.
    """
    if not 0.0 <= theta_cone <= math.pi:
        raise ValueError("cone angle must lie in [0, pi]")
    omega = FULL_TURN * (1.0 - math.cos(theta_cone))
    return omega, -omega / 2.0


def solid_angle_polygon(vertices) -> float:
    """Signed solid angle of a geodesic polygon on the unit sphere.

    Vertices are unit 3-vectors in traversal order; the result is the
    oriented area enclosed (positive for counter-clockwise seen from
    outside), from a fan of Van Oosterom-Strackee triangle solid angles.
    """
    v = np.asarray(vertices, dtype=float)
    total = 0.0
    for k in range(1, len(v) - 1):
        a, b, c = v[0], v[k], v[k + 1]
        num = float(np.linalg.det(np.stack([a, b, c])))
        den = 1.0 + float(a @ b + b @ c + c @ a)
        total += 2.0 * math.atan2(num, den)
    return total


# ---------------------------------------------------------------------------
# error-disturbance (projective measurements)

@dataclass(frozen=True)
class ErrorDisturbanceResult:
    epsilon: float
    eta: float
    sigma_a: float
    sigma_b: float
    bound: float
    heisenberg_lhs: float
    ozawa_lhs: float

    @property
    def heisenberg_holds(self) -> bool:
        return self.heisenberg_lhs >= self.bound - 1e-12

    @property
    def ozawa_holds(self) -> bool:
        return self.ozawa_lhs >= self.bound - 1e-12


def _check_pm1(op: LinearOperator, name):
    eigs = np.linalg.eigvalsh(op.matrix)
    if np.max(np.abs(np.abs(eigs) - 1.0)) > 1e-9:
        raise ValueError(f"{name} must have a +-1 spectrum, got eigenvalues {eigs}")


# exact zeros of epsilon/eta come out as sqrt(float dust) ~ 3e-8; snap them
# so both evaluation routes agree at the 1e-9 level
_ZERO_SNAP = 1e-7


def _snap_zero(x):
    return 0.0 if x < _ZERO_SNAP else x


def ozawa(psi: PureState, a_op: LinearOperator, b_op: LinearOperator,
          oa_op: LinearOperator) -> ErrorDisturbanceResult:
    """Error-disturbance budget for a projective measurement of O_A.

    epsilon^2 = 2 + <O_A> + <A O_A A> - <(A+1) O_A (A+1)> on psi, and
    eta^2 the analogue with X_B = sum_k P_k B P_k (P_k the eigenprojectors
    of O_A), i.e. the measurement-dephased B.  Returns both the product
    (generalized-Heisenberg) and Ozawa left-hand sides against the bound
    |<[A,B]>|/2.
    """
    for op, name in ((a_op, "A"), (b_op, "B"), (oa_op, "O_A")):
        _check_pm1(op, name)
    psi = psi.normalized()
    v = psi.amps
    a = qcore.embedded_matrix(a_op, psi.dofs)
    b = qcore.embedded_matrix(b_op, psi.dofs)
    oa = qcore.embedded_matrix(oa_op, psi.dofs)
    dim = a.shape[0]
    eye = np.eye(dim)

    def ev(mat):
        return float(np.vdot(v, mat @ v).real)

    eps2 = 2.0 + ev(oa) + ev(a @ oa @ a) - ev((a + eye) @ oa @ (a + eye))
    evals, evecs = np.linalg.eigh(oa)
    x_b = np.zeros_like(b)
    for lam in np.unique(np.round(evals, 9)):
        sel = np.abs(evals - lam) < 1e-9
        p = evecs[:, sel] @ evecs[:, sel].conj().T
        x_b = x_b + p @ b @ p
    eta2 = 2.0 + ev(x_b) + ev(b @ x_b @ b) - ev((b + eye) @ x_b @ (b + eye))
    epsilon = _snap_zero(math.sqrt(max(0.0, eps2)))
    eta = _snap_zero(math.sqrt(max(0.0, eta2)))
    sigma_a = math.sqrt(max(0.0, ev(a @ a) - ev(a) ** 2))
    sigma_b = math.sqrt(max(0.0, ev(b @ b) - ev(b) ** 2))
    comm = a @ b - b @ a
    bound = 0.5 * abs(complex(np.vdot(v, comm @ v)))
    return ErrorDisturbanceResult(
        epsilon, eta, sigma_a, sigma_b, bound,
        heisenberg_lhs=epsilon * eta,
        ozawa_lhs=epsilon * eta + epsilon * sigma_b + sigma_a * eta)


def ozawa_oracle(psi: PureState, a_op: LinearOperator, b_op: LinearOperator,
                 oa_op: LinearOperator):
    """(epsilon, eta) from an explicit dilation of the projective measurement.

    Builds the measurement unitary U|phi>|0> = sum_k (P_k|phi>)|k> on
    object (x) probe, the meter observable M = sum_k lambda_k |k><k|, and
    evaluates the norm definitions
        epsilon = ||(U+(1(x)M)U - A(x)1)|psi>|0>||,
        eta     = ||(U+(B(x)1)U - B(x)1)|psi>|0>||
    directly.  Independent of the three-state expectation route.
    """
    psi = psi.normalized()
    a = qcore.embedded_matrix(a_op, psi.dofs)
    b = qcore.embedded_matrix(b_op, psi.dofs)
    oa = qcore.embedded_matrix(oa_op, psi.dofs)
    d = a.shape[0]
    evals, evecs = np.linalg.eigh(oa)
    lams = np.unique(np.round(evals, 9))
    projs = []
    for lam in lams:
        sel = np.abs(evals - lam) < 1e-9
        projs.append(evecs[:, sel] @ evecs[:, sel].conj().T)
    kk = len(lams)
    nd = d * kk
    u = np.zeros((nd, nd), dtype=complex)
    for i in range(d):
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        col = np.zeros(nd, dtype=complex)
        for k, p in enumerate(projs):
            col += np.kron(p @ e, _unit(kk, k))
        u[:, i * kk + 0] = col
    # complete the remaining columns with an orthonormal basis of the
    # orthogonal complement (deterministic via SVD null space)
    specified = u[:, [i * kk for i in range(d)]]
    _, _, vh = np.linalg.svd(specified.conj().T)
    null = vh[d:].conj().T
    slot = 0
    for i in range(d):
        for k in range(1, kk):
            u[:, i * kk + k] = null[:, slot]
            slot += 1
    meter = np.kron(np.eye(d), np.diag(lams).astype(complex))
    vec = np.kron(psi.amps, _unit(kk, 0))
    a_full = np.kron(a, np.eye(kk))
    b_full = np.kron(b, np.eye(kk))
    eps = np.linalg.norm((u.conj().T @ meter @ u - a_full) @ vec)
    eta = np.linalg.norm((u.conj().T @ b_full @ u - b_full) @ vec)
    return _snap_zero(float(eps)), _snap_zero(float(eta))


def _unit(n, k):
    e = np.zeros(n, dtype=complex)
    e[k] = 1.0
    return e


def ozawa_batch(a_vecs, b_vecs, oa_vecs, psis):
    """Vectorised (epsilon, eta, sigma_a, sigma_b, bound) for qubit configs.

    All observables are sigma.n for unit vectors (rows of the *_vecs
    arrays); psis holds normalized spinors (N, 2).  Uses
    epsilon^2 = 2 - <{A, O_A}> and eta^2 = 2 - <{B, X_B}> with
    X_B = (B + O_A B O_A)/2 = (b.o) O_A, valid for +-1 observables.
    """
    a_vecs = np.asarray(a_vecs, float)
    b_vecs = np.asarray(b_vecs, float)
    oa_vecs = np.asarray(oa_vecs, float)
    psis = np.asarray(psis, complex)
    sig = np.stack([qcore.SIGMA_X, qcore.SIGMA_Y, qcore.SIGMA_Z])

    def obs(v6):
        return np.einsum("ni,ijk->njk", v6, sig)

    a = obs(a_vecs)
    b = obs(b_vecs)
    oa = obs(oa_vecs)

    def ev(mat):
        return np.einsum("ni,nij,nj->n", psis.conj(), mat, psis).real

    anti_ao = np.einsum("nij,njk->nik", a, oa) + np.einsum("nij,njk->nik", oa, a)
    eps2 = 2.0 - ev(anti_ao)
    bo = np.einsum("ni,ni->n", b_vecs, oa_vecs)
    x_b = bo[:, None, None] * oa
    anti_bx = np.einsum("nij,njk->nik", b, x_b) + np.einsum("nij,njk->nik", x_b, b)
    eta2 = 2.0 - ev(anti_bx)
    sigma_a = np.sqrt(np.clip(1.0 - ev(a) ** 2, 0.0, None))
    sigma_b = np.sqrt(np.clip(1.0 - ev(b) ** 2, 0.0, None))
    comm = np.einsum("nij,njk->nik", a, b) - np.einsum("nij,njk->nik", b, a)
    bound = 0.5 * np.abs(np.einsum("ni,nij,nj->n", psis.conj(), comm, psis))
    eps = np.sqrt(np.clip(eps2, 0.0, None))
    eta = np.sqrt(np.clip(eta2, 0.0, None))
    return eps, eta, sigma_a, sigma_b, bound


# ---------------------------------------------------------------------------
# Pauli non-commutation closed forms

def noncommutation_polarizations(beta):
    """Final polarizations after the pi-rotation pairs AB and BA.

    A = -i sigma_x and B = -i (sigma_x cos beta + sigma_z sin beta) are the
    pi rotations about x and about an axis tilted by beta in the xz-plane;
    the operator products are applied to the spin-up input (P = z-hat).
    Returns (P_AB, P_BA) as 3-vectors.
    """
    a_mat = -1j * qcore.SIGMA_X
    b_mat = -1j * (math.cos(beta) * qcore.SIGMA_X + math.sin(beta) * qcore.SIGMA_Z)
    out = []
    for mat in (a_mat @ b_mat, b_mat @ a_mat):
        psi = PureState((qcore.SPIN,), mat @ np.array([1.0, 0.0], dtype=complex))
        out.append(qcore.bloch_vector(psi).as_array())
    return out[0], out[1]
