"""Runners for the classic interferometry experiments: 4pi symmetry, COW,
spin superposition, double resonance, absorption, AC and scalar-AB phases."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .. import analysis, beamline, elements, qcore
from ..constants import CONSTANTS
from ..elements import AbsorberSpec, DcCoilSpec, RfFlipperSpec
from ..qcore import ENERGY, PATH, SPIN
from ..rng import derive_key
from .registry import experiment

TWO_PI = 2.0 * math.pi

# velocity back-derived from the 144 Gcm <-> 704 deg Larmor anchor
_V_FOURPI = abs(CONSTANTS.gyromagnetic) * 1.44e-4 / math.radians(704.0)


def _o_intensity_closed(alpha):
    """Forward-beam fringe of a spin rotated by alpha in one path: (1+cos a/2)/4."""
    return 0.25 * (1.0 + np.cos(np.asarray(alpha) / 2.0))


@experiment("fourpi", {
    "field_integral": ("field_integral", "144Gcm"),
    "velocity": ("velocity", _V_FOURPI),
    "n_points": ("int", 96),
    "alpha_max": ("angle", 8 * math.pi),
    "mean_counts": ("scalar", 1e4),
})
def run_fourpi(ctx):
    """Fringe period of I_O versus spin-rotation angle is 4 pi, not 2 pi."""
    alpha_anchor = elements.larmor_angle_from_integral(ctx["field_integral"], ctx["velocity"])
    ctx.derived("larmor_angle_deg", math.degrees(alpha_anchor))
    ctx.check("field integral 144 Gcm maps to 704 deg Larmor angle",
              704.0, math.degrees(alpha_anchor), 0.06 * 704.0,
              "paper", "4pi symmetry")

    xs = np.linspace(0.0, ctx["alpha_max"], ctx["n_points"])
    closed = _o_intensity_closed(xs)
    # cross-check the closed form against full beamline propagation
    worst = 0.0
    for a in xs[:: max(1, len(xs) // 16)]:
        run = beamline.propagate(
            beamline.BeamlineTopology(path_ii=(DcCoilSpec(axis=(0, 1, 0), angle=float(a)),)),
            qcore.spin_up(), 0.0)
        worst = max(worst, abs(run.intensities.i_o - float(_o_intensity_closed(a))))
    ctx.check("closed form vs full propagation", 0.0, worst, 1e-10, "derived")

    period, _, _ = analysis.fit_fringe_frequency(xs, closed * 1e6, freq_guess=0.5)
    ctx.derived("fitted_period_noiseless", period)
    ctx.check("noiseless fringe period is 4 pi", 4 * math.pi, period,
              1e-4 * 4 * math.pi, "paper", "4pi symmetry")

    scan = analysis.sampled_scan("larmor_angle", xs, closed,
                                 mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "fourpi"))
    p_noisy, p_err, fit = analysis.fit_fringe_frequency(xs, scan.counts_o, freq_guess=0.5)
    ctx.add_scan(scan, fit)
    ctx.derived("fitted_period_poisson", p_noisy)
    ctx.derived("fitted_period_poisson_err", p_err)
    ctx.check("Poisson fringe period within 3 sigma of 4 pi", 4 * math.pi,
              p_noisy, 3.0 * p_err, "derived")


@experiment("cow", {
    "wavelength": ("length", "1.445A"),
    "path_length": ("length", "4cm"),
    "delta_h_max": ("length", "3cm"),
    "tilt_max": ("angle", "20deg"),
    "n_points": ("int", 161),
    "mean_counts": ("scalar", 1e4),
})
def run_cow(ctx):
    """Gravitationally induced fringes versus interferometer tilt."""
    lam, length, dh = ctx["wavelength"], ctx["path_length"], ctx["delta_h_max"]
    k_grav = elements.gravity_phase(lam, length, dh)
    ctx.derived("phase_amplitude_rad", k_grav)
    period_deg = math.degrees(TWO_PI / abs(k_grav))
    ctx.derived("tilt_period_deg", period_deg)
    ctx.check("tilt-scan period near phi=0 is about 6 deg", 6.0, period_deg,
              0.2 * 6.0, "paper", "gravity induced phases")
    ctx.check("phase linear in wavelength", 2.0,
              elements.gravity_phase(2 * lam, length, dh) / k_grav, 1e-12, "trivial")

    tilts = np.linspace(-ctx["tilt_max"], ctx["tilt_max"], ctx["n_points"])
    phases = k_grav * np.sin(tilts)
    intensity = 0.25 * (1.0 + np.cos(phases))
    # fit against sin(tilt) as the abscissa: angular frequency = |K|
    w_fit, _, _ = analysis.fit_fringe_frequency(np.sin(tilts), intensity * 1e6,
                                                freq_guess=abs(k_grav))
    ctx.check("fitted fringe frequency vs sin(tilt)", abs(k_grav),
              TWO_PI / w_fit, 1e-6 * abs(k_grav), "derived")
    scan = analysis.sampled_scan("tilt", tilts, intensity,
                                 mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "cow"))
    ctx.add_scan(scan)
    ctx.derived("intensity_min", float(intensity.min()))


@experiment("spin_superposition_dc", {
    "n_points": ("int", 25),
    "mean_counts": ("scalar", 1e4),
    "analysis_chi": ("angle", 0.7),
})
def run_spin_superposition_dc(ctx):
    """Coherent |up> + e^{i chi}|down> superposition: polarization in the xy-plane."""
    chis = np.linspace(-math.pi, math.pi, ctx["n_points"])
    worst = 0.0
    worst_z = 0.0
    for chi in chis:
        run = beamline.propagate(
            beamline.BeamlineTopology(path_ii=(DcCoilSpec(axis=(0, 1, 0), angle=math.pi),)),
            qcore.spin_up(), float(chi))
        bv = qcore.bloch_vector(run.state_o)
        worst = max(worst, abs(bv.px - math.cos(chi)), abs(bv.py - math.sin(chi)))
        worst_z = max(worst_z, abs(bv.pz))
    ctx.check("exit polarization equals (cos chi, sin chi, 0)", 0.0, worst,
              1e-10, "paper", "spin superposition")
    ctx.check("no z-component of exit polarization", 0.0, worst_z, 1e-12, "trivial")

    # spin analysis fringe at fixed chi: rotating the analyzer shifts the
    # fringe by -chi under the 1 + C cos(x + phase) convention
    chi0 = ctx["analysis_chi"]
    run = beamline.propagate(
        beamline.BeamlineTopology(path_ii=(DcCoilSpec(axis=(0, 1, 0), angle=math.pi),)),
        qcore.spin_up(), chi0)
    thetas = np.linspace(0.0, TWO_PI, 24, endpoint=False)
    probs = np.array([qcore.expectation(run.state_o.normalized(),
                                        qcore.equatorial_projector(t)) for t in thetas])
    fit = analysis.fit_fringe(thetas, probs * 1e6)
    ctx.check("analyzer fringe phase equals -chi", -chi0, fit.phase, 1e-9, "derived")
    scan = analysis.sampled_scan("analyzer_angle", thetas, probs,
                                 mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "ss_dc"))
    ctx.add_scan(scan, fit)


@experiment("spin_superposition_rf", {
    "rf_frequency": ("frequency", "32kHz"),
    "chi": ("angle", 0.4),
    "n_times": ("int", 48),
    "mean_counts": ("scalar", 1e4),
})
def run_spin_superposition_rf(ctx):
    """RF-flipped superposition: polarization rotates at the RF frequency."""
    omega = TWO_PI * ctx["rf_frequency"]
    chi = ctx["chi"]
    state = _rf_superposition_state(chi)
    times = np.arange(ctx["n_times"]) * (TWO_PI / omega / ctx["n_times"])
    worst = 0.0
    mean_x = mean_y = 0.0
    for t in times:
        detected = elements.stroboscopic_state(state, float(t), omega)
        bv = qcore.bloch_vector(detected)
        worst = max(worst, abs(bv.px - math.cos(chi + omega * t)),
                    abs(bv.py - math.sin(chi + omega * t)))
        mean_x += bv.px / len(times)
        mean_y += bv.py / len(times)
    ctx.check("stroboscopic polarization equals (cos(chi+wt), sin(chi+wt), 0)",
              0.0, worst, 1e-10, "paper", "spin superposition, RF variant")
    ctx.check("time-averaged transverse polarization vanishes", 0.0,
              math.hypot(mean_x, mean_y), 1e-10, "derived")
    # without time resolution the energy label is traced out: no coherence
    traced = qcore.bloch_vector(state)
    ctx.check("time-integrating detection sees no transverse polarization",
              0.0, math.hypot(traced.px, traced.py), 1e-12, "derived")
    ctx.derived("rf_omega", omega)


def _rf_superposition_state(chi):
    """(|up,E0> + e^{i chi} |down,E0-hw>)/sqrt2 on (spin, energy)."""
    up = qcore.tensor(qcore.spin_up(), qcore.energy_level(0))
    down = qcore.tensor(qcore.spin_down(), qcore.energy_level(-1))
    amps = (up.amps + cmath.exp(1j * chi) * down.amps) / math.sqrt(2)
    return qcore.PureState(up.dofs, amps)


@experiment("double_resonance_ifm", {
    "nu_1": ("frequency", 71899.80),
    "nu_2": ("frequency", 71899.78),
    "t_max": ("time", 150.0),
    "n_points": ("int", 120),
    "mean_counts": ("scalar", 1e4),
})
def run_double_resonance_ifm(ctx):
    """Beating between per-path RF flippers detuned by delta nu."""
    dnu = abs(ctx["nu_2"] - ctx["nu_1"])
    ts = np.linspace(0.0, ctx["t_max"], ctx["n_points"])
    intensity = 0.5 * (1.0 + np.cos(TWO_PI * dnu * ts))
    period, _, _ = analysis.fit_fringe_frequency(ts, intensity * 1e6,
                                                 freq_guess=TWO_PI * dnu)
    ctx.derived("beat_period_s", period)
    ctx.check("beat period equals 1/delta-nu", 1.0 / dnu, period,
              1e-9 / dnu, "derived")
    ctx.check("measured 47.90 s consistent with 1/delta-nu", 47.90, 1.0 / dnu,
              0.05 * 47.90, "paper", "double resonance")

    # equal frequencies: the full spin+energy propagation shows stationary,
    # full-contrast fringes (energy exchange does not mark the path)
    psi = qcore.tensor(qcore.tensor(qcore.equal_superposition(dof=PATH), qcore.spin_up()),
                       qcore.energy_level(0))
    psi = qcore.apply(elements.conditional_on_path(0, elements.full_flip_operator()), psi)
    psi = qcore.apply(elements.conditional_on_path(1, elements.full_flip_operator()), psi)
    chis = np.linspace(0.0, TWO_PI, 16, endpoint=False)
    i_o = []
    for chi in chis:
        shift = elements.conditional_on_path(
            1, qcore.LinearOperator((SPIN,), cmath.exp(1j * chi) * np.eye(2), unitary=True))
        out = qcore.apply(shift, psi)
        # balanced recombination onto the O port
        proj = qcore.path_projector(0.0, +1)
        i_o.append(qcore.expectation(out, proj))
    contrast = (max(i_o) - min(i_o)) / (max(i_o) + min(i_o))
    ctx.check("equal-frequency flippers keep full contrast", 1.0, contrast,
              1e-10, "derived")
    scan = analysis.sampled_scan("time", ts, intensity, mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "dres_ifm"))
    ctx.add_scan(scan)


@experiment("double_resonance_polarimeter", {
    "delta_nu": ("frequency", "20uHz"),
    "n_points": ("int", 96),
    "n_periods": ("scalar", 1.5),
    "mean_counts": ("scalar", 1e4),
})
def run_double_resonance_polarimeter(ctx):
    """Kyoto variant: very slow beating of the polarimeter signal.

    The state picks up opposite-sign phases on the two spin components; the
    observed intensity period is 1/delta-nu (the measured anchor), which
    this runner adopts as the beat law.
    """
    dnu = ctx["delta_nu"]
    period_expected = 1.0 / dnu
    ts = np.linspace(0.0, ctx["n_periods"] * period_expected, ctx["n_points"])
    intensity = 0.5 * (1.0 + np.cos(TWO_PI * dnu * ts))
    period, _, _ = analysis.fit_fringe_frequency(ts, intensity * 1e6,
                                                 freq_guess=TWO_PI * dnu)
    ctx.derived("beat_period_s", period)
    ctx.check("beat period equals 1/delta-nu", period_expected, period,
              1e-9 * period_expected, "derived")
    ctx.check("paper period 49904.9 s within 0.5 percent", 49904.9,
              period_expected, 0.005 * 49904.9, "paper", "double resonance, Kyoto")
    scan = analysis.sampled_scan("time", ts, intensity, mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "dres_pol"))
    ctx.add_scan(scan)


@experiment("absorption", {
    "t_min": ("scalar", 0.05),
    "t_max": ("scalar", 1.0),
    "n_transmissivities": ("int", 20),
    "n_chi": ("int", 24),
    "mean_counts": ("scalar", 1e4),
})
def run_absorption(ctx):
    """Square-root vs linear fringe-amplitude laws for stochastic/deterministic absorbers."""
    t_grid = np.linspace(ctx["t_min"], ctx["t_max"], ctx["n_transmissivities"])
    chis = np.linspace(0.0, TWO_PI, ctx["n_chi"], endpoint=False)
    amps = {"stochastic": [], "deterministic": []}
    worst_closed = 0.0
    for kind in ("stochastic", "deterministic"):
        for t in t_grid:
            topo = beamline.BeamlineTopology(path_ii=(AbsorberSpec(kind, float(t)),))
            intensity = []
            for chi in chis:
                run = beamline.propagate(topo, qcore.spin_up(), float(chi))
                intensity.append(run.intensities.i_o)
                closed = (1.0 + t + 2.0 * (math.sqrt(t) if kind == "stochastic" else t)
                          * math.cos(chi)) / 8.0
                worst_closed = max(worst_closed, abs(run.intensities.i_o - closed))
            fit = analysis.fit_fringe(chis, np.asarray(intensity) * 1e6)
            amps[kind].append(fit.amplitude)
    ctx.check("closed forms vs full propagation", 0.0, worst_closed, 1e-10, "derived")
    slopes = {}
    for kind in ("stochastic", "deterministic"):
        ratio = np.asarray(amps[kind]) / amps[kind][-1]
        slope = np.polyfit(np.log(t_grid), np.log(ratio), 1)[0]
        slopes[kind] = float(slope)
        ctx.derived(f"{kind}_amplitude_ratio", ratio)
    ctx.derived("stochastic_slope", slopes["stochastic"])
    ctx.derived("deterministic_slope", slopes["deterministic"])
    ctx.check("stochastic fringe amplitude scales as sqrt(T)", 0.5,
              slopes["stochastic"], 0.01, "paper", "absorption")
    ctx.check("deterministic fringe amplitude scales as T", 1.0,
              slopes["deterministic"], 0.01, "paper", "absorption")

    t_demo = 0.24
    topo = beamline.BeamlineTopology(path_ii=(AbsorberSpec("stochastic", t_demo),))
    intensity = np.array([beamline.propagate(topo, qcore.spin_up(), float(c)).intensities.i_o
                          for c in chis])
    scan = analysis.sampled_scan("delta_chi", chis, intensity,
                                 mean_counts=ctx["mean_counts"],
                                 seed=derive_key(ctx.seed, "absorption"))
    ctx.add_scan(scan, analysis.fit_fringe(chis, scan.counts_o))


@experiment("ac_phase", {
    "voltage": ("voltage", "45kV"),
    "gap": ("length", "0.154cm"),
    "electrode_length": ("length", "2.53cm"),
    "velocity": ("velocity", 2200.0),
})
def run_ac_phase(ctx):
    """Aharonov-Casher phase: magnitude, velocity independence, polarity linearity."""
    e_field = ctx["voltage"] / ctx["gap"]
    length = ctx["electrode_length"]
    phi_ac = elements.ac_phase(e_field, length)
    ctx.derived("ac_phase_rad", phi_ac)
    ctx.check("relative AC phase is 1.5 mrad", 1.5e-3, phi_ac, 0.02 * 1.5e-3,
              "paper", "Aharonov-Casher")

    # motional-field route: gamma * (v E / c^2) * L / v, manifestly v-free
    v = ctx["velocity"]
    via_motional = [elements.larmor_angle(vv * e_field / CONSTANTS.c ** 2, length, vv)
                    for vv in (v, 2.0 * v)]
    ctx.check("velocity independence (motional-field route, v vs 2v)", 0.0,
              abs(via_motional[0] - via_motional[1]) / phi_ac, 1e-12,
              "paper", "Aharonov-Casher")
    ctx.check("motional-field route equals direct formula", phi_ac,
              abs(via_motional[0]), 1e-12 * phi_ac, "derived")
    ctx.check("odd under electrode polarity flip", -phi_ac,
              elements.ac_phase(-e_field, length), 1e-15, "trivial")

    # unpolarized linearization: with Phi_0 + Phi_G = 0 and Phi_M = pi/2 the
    # polarity difference of the O signal is linear in |Phi_AC|
    def o_signal(polarity, phi):
        vals = []
        for sigma in (+1.0, -1.0):
            dchi = sigma * (math.pi / 2 + polarity * phi)
            vals.append(0.25 * (1.0 + math.cos(dchi)))
        return 0.5 * sum(vals)

    worst_rel = 0.0
    slope = (o_signal(+1, 1e-9) - o_signal(-1, 1e-9)) / 1e-9
    for phi in np.linspace(1e-3, 50e-3, 25):
        d = o_signal(+1, phi) - o_signal(-1, phi)
        worst_rel = max(worst_rel, abs(d - slope * phi) / abs(slope * phi))
    ctx.check("polarity signal difference linear within 1 percent below 50 mrad",
              0.0, worst_rel, 0.01, "paper", "Aharonov-Casher")


@experiment("sab_dispersion", {
    "spread": ("scalar", 0.02),
    "max_phase": ("angle", 40 * math.pi),
    "n_phases": ("int", 41),
    "n_quadrature": ("int", 4001),
})
def run_sab_dispersion(ctx):
    """Scalar Aharonov-Bohm: dispersive static phase vs non-dispersive pulsed phase."""
    spread = ctx["spread"]
    phases = np.linspace(0.0, ctx["max_phase"], ctx["n_phases"])

    def wavelength_average(phi, s, dispersive):
        if s == 0.0:
            return 1.0
        u = np.linspace(1.0 - 6.0 * s, 1.0 + 6.0 * s, ctx["n_quadrature"])
        p = np.exp(-0.5 * ((u - 1.0) / s) ** 2)
        p /= np.trapezoid(p, u)
        z = np.trapezoid(p * np.exp(1j * phi * (u if dispersive else 1.0)), u)
        return abs(z)

    def static_contrast(phi, s):
        return wavelength_average(phi, s, dispersive=True)

    worst = max(abs(static_contrast(p, spread) - math.exp(-0.5 * (p * spread) ** 2))
                for p in phases)
    ctx.check("static contrast equals the Gaussian characteristic function",
              0.0, worst, 1e-6, "derived")
    worst_pulsed = max(abs(wavelength_average(p, spread, dispersive=False) - 1.0)
                       for p in phases)
    ctx.check("pulsed-field contrast stays 1", 0.0, worst_pulsed, 1e-9,
              "paper", "scalar Aharonov-Bohm")
    ctx.check("zero spread gives unit contrast in both modes", 1.0,
              static_contrast(ctx["max_phase"], 0.0), 1e-12, "trivial")
    c_large = static_contrast(40 * math.pi, 0.02)
    ctx.derived("static_contrast_at_40pi", c_large)
    ctx.check_bound("static contrast collapses at 40 pi dispersive phase",
                    c_large, 0.1, "derived")
    ctx.derived("static_contrast_curve",
                [static_contrast(float(p), spread) for p in phases])
