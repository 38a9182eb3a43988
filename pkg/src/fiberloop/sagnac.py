"""Sagnac fiber-loop switch analysis on top of pump propagation records.

The weak signal acquires a cross-phase-modulation (XPM) phase from the
co-propagating pump,

    phi(tau) = 2 gamma_x  int_0^L |A(z, tau_pump(tau, z))|^2 dz,

with the factor 2 for co-polarized pump and signal.  The loop transmission
follows the lossless Sagnac relations T = sin^2(phi/2), R = 1 - T,
integrated over the signal's intensity profile.

When the signal sits at a different wavelength than the pump it slips
through the pump at the group-velocity mismatch rate
d_w = beta1(signal) - beta1(pump).  The phase is then accumulated on an
extended signal-frame time axis; once the signal fully crosses the pump the
accumulated phase approaches 2 gamma_x E_pump / |d_w| (pure walk-through
XPM), which is what makes the switching curve a function of pump energy
alone in the absence of Raman scattering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fiber import FiberSpec, beta1_relative, xpm_coefficient
from .pulses import Grid, make_grid, gaussian_pulse
from .propagator import (PropagationOptions, PropagationRecord,
                         propagate_batch, SolverError)

__all__ = [
    "SignalSpec",
    "PhaseProfile",
    "SwitchPoint",
    "SwitchCurve",
    "SpanResult",
    "XpmIntegrator",
    "xpm_phase",
    "switch_probabilities",
    "energy_sweep",
    "span_for_threshold",
    "span_vs_length",
    "walkoff_ps_per_m",
    "peak_energy_estimate_nj",
]


@dataclass(frozen=True)
class SignalSpec:
    """Weak probe routed by the loop.

    The default places the signal at 1310 nm with walk-off enabled and the
    crossing timed to complete at the fiber exit; this reproduces the
    energy-dependent switching scale of the loop-switch experiments (full
    walk-through XPM).  Setting walk_off_enabled=False and
    delay_mode="center" gives the co-moving signal picture instead.
    """

    wavelength: float = 1310.0      # nm
    fwhm: float = 1.0               # ps, Gaussian intensity profile
    delay: float = 0.0              # ps, offset added to the resolved delay
    walk_off_enabled: bool = True
    delay_mode: str = "exit"        # "exit" | "center" | "max"

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ValueError("signal fwhm must be positive")
        if self.delay_mode not in ("exit", "center", "max"):
            raise ValueError(f"unknown delay_mode {self.delay_mode!r}")


@dataclass(frozen=True)
class PhaseProfile:
    """XPM phase phi(tau) sampled on the signal-frame time axis (ps, rad)."""

    tau: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class SwitchPoint:
    pump_energy: float              # nJ
    T: float
    R: float
    phase_at_signal_center: float   # rad

    def __post_init__(self):
        if not (-1e-12 <= self.T <= 1.0 + 1e-12):
            raise ValueError(f"T out of range: {self.T}")


@dataclass
class SwitchCurve:
    points: list
    metadata: dict = field(default_factory=dict)
    # optional raw phase profiles phi[i_energy, i_tau] kept for span
    # refinement by interpolation in energy (see span_from_profiles)
    tau: np.ndarray | None = None
    profiles: np.ndarray | None = None

    def __post_init__(self):
        e = self.energies
        if np.any(np.diff(e) <= 0):
            raise ValueError("switch-curve energies must be strictly increasing")

    @property
    def energies(self):
        return np.array([p.pump_energy for p in self.points])

    @property
    def transmissions(self):
        return np.array([p.T for p in self.points])


@dataclass(frozen=True)
class SpanResult:
    theta: float
    e_lo: float                     # nJ
    e_hi: float                     # nJ
    found: bool = True

    @property
    def width(self):
        return self.e_hi - self.e_lo if self.found else 0.0


def walkoff_ps_per_m(signal_wavelength_nm, pump_wavelength_nm, fiber: FiberSpec = None):
    """Group-delay slip rate d_w = beta1(signal) - beta1(pump) in ps/m."""
    return beta1_relative(signal_wavelength_nm, pump_wavelength_nm, fiber) * 1e-3


def _resolve_delay(signal: SignalSpec, length_m, pump_fwhm_ps, d_w_ps_m):
    """Signal-frame center position of the probe.

    "exit": the signal finishes crossing the pump just before the fiber end,
    so the phase integral samples the fully evolved pump; the guard of four
    pump widths keeps the leading pump edge inside the crossing.
    """
    if not signal.walk_off_enabled or signal.delay_mode == "center":
        return signal.delay
    if signal.delay_mode == "max":
        return None                  # chosen after phi(tau) is known
    guard = 4.0 * pump_fwhm_ps
    return -d_w_ps_m * length_m - guard + signal.delay


class XpmIntegrator:
    """Accepted-step observer accumulating int |A(z, .)|^2 dz in the signal frame.

    The buffer lives on an extended time axis covering the full slip range;
    each accepted step deposits the trapezoid contribution of both step
    endpoints, linearly interpolated to fractional sample offsets.
    """

    def __init__(self, grid: Grid, length_m, d_w_ps_m=0.0, batch_shape=()):
        self.grid = grid
        self.d_w = d_w_ps_m
        dt = grid.dt
        s_end = -d_w_ps_m * length_m            # pump-center trace at z = L, ps
        lo = min(0.0, s_end)
        hi = max(0.0, s_end)
        pad = 2                                  # room for fractional deposits
        self.extra = int(np.ceil((hi - lo) / dt)) + 2 * pad
        self.offset0 = lo - pad * dt             # tau of buffer index aligned with t[0]
        self.tau = grid.t[0] + self.offset0 + np.arange(grid.n + self.extra) * dt
        self.buffer = np.zeros(batch_shape + (grid.n + self.extra,))

    def _deposit(self, intensity, z, weight):
        dt = self.grid.dt
        s = -self.d_w * z
        off = (s - self.offset0) / dt
        i0 = int(np.floor(off))
        frac = off - i0
        n = self.grid.n
        self.buffer[..., i0:i0 + n] += weight * (1.0 - frac) * intensity
        self.buffer[..., i0 + 1:i0 + 1 + n] += weight * frac * intensity

    def __call__(self, z0, z1, a0, a1):
        w = 0.5 * (z1 - z0)
        self._deposit(np.abs(a0) ** 2, z0, w)
        self._deposit(np.abs(a1) ** 2, z1, w)

    def phase(self, gamma_per_m):
        """2 gamma int |A|^2 dz in rad; gamma in W^-1 m^-1, buffer in W m."""
        return 2.0 * gamma_per_m * self.buffer


def xpm_phase(record: PropagationRecord, signal: SignalSpec, gamma_per_m,
              fiber: FiberSpec = None) -> PhaseProfile:
    """XPM phase from a propagation record.

    Without walk-off this uses the per-step trapezoid integral accumulated
    by the solver; with walk-off it integrates the recorded snapshots along
    the signal's characteristic (snapshot density sets the z resolution).
    """
    grid = record.grid
    if not signal.walk_off_enabled:
        phi = 2.0 * gamma_per_m * record.intensity_integral
        return PhaseProfile(tau=grid.t.copy(), phi=phi)
    fiber = fiber if fiber is not None else FiberSpec()
    d_w = walkoff_ps_per_m(signal.wavelength, grid.carrier_wavelength, fiber)
    if len(record.z) < 2:
        raise ValueError("record needs at least two snapshots for walk-off XPM")
    length = record.z[-1]
    integ = XpmIntegrator(grid, length, d_w)
    z = np.asarray(record.z)
    w = np.empty_like(z)
    w[0] = (z[1] - z[0]) / 2.0
    w[-1] = (z[-1] - z[-2]) / 2.0
    w[1:-1] = (z[2:] - z[:-2]) / 2.0
    for zk, wk, env in zip(z, w, record.envelopes):
        integ._deposit(np.abs(env.a) ** 2, zk, wk)
    return PhaseProfile(tau=integ.tau, phi=2.0 * gamma_per_m * integ.buffer)


def _signal_weights(tau, fwhm_ps, center_ps):
    t0 = fwhm_ps / (2.0 * np.sqrt(np.log(2.0)))
    w = np.exp(-((tau - center_ps) ** 2) / t0 ** 2)
    total = w.sum()
    if total == 0.0:
        raise ValueError("signal profile does not overlap the phase axis")
    return w / total


def switch_probabilities(profile: PhaseProfile, signal: SignalSpec,
                         delay_ps=None):
    """(T, R) of the loop for a signal centered at delay_ps on profile.tau."""
    center = signal.delay if delay_ps is None else delay_ps
    w = _signal_weights(profile.tau, signal.fwhm, center)
    t = float(np.sum(w * np.sin(profile.phi / 2.0) ** 2, axis=-1))
    t = min(max(t, 0.0), 1.0)
    return t, 1.0 - t


# ---------------------------------------------------------------------------
# energy sweeps
# ---------------------------------------------------------------------------

def _auto_grid(length_m, carrier_nm=1550.0):
    # 100 m-class runs at 3 nJ occupy roughly [-10, +60] ps and a few THz;
    # 500 m-class runs shed strongly red-shifted solitons that trail far
    # behind the pump and need both more window and more bandwidth.
    if length_m <= 150.0:
        return make_grid(2 ** 14, 192.0, carrier_nm)
    return make_grid(2 ** 15, 512.0, carrier_nm)


def default_sweep_options(length_m=100.0, **overrides):
    """Sweep solver settings: T(E) is insensitive to the local error target
    below ~3e-4 (well under the span tolerances), and long runs enable the
    band-edge absorber so deep-IR soliton content cannot alias."""
    base = dict(snapshot_count=2)
    if length_m <= 150.0:
        base["local_error_target"] = 3e-4
    else:
        base["local_error_target"] = 1e-3
        base["edge_absorber"] = True
    base.update(overrides)
    return PropagationOptions(**base)


def energy_sweep(fiber: FiberSpec, length_m, pump_fwhm_ps, energies_nj, f_R,
                 signal: SignalSpec = None, grid: Grid = None,
                 opts: PropagationOptions = None, gamma_x_per_m=None,
                 keep_profiles=False) -> SwitchCurve:
    """Switching curve: one propagation per pump energy, batched in lockstep.

    All energies share one adaptive propagation (worst-case step size), which
    replaces per-energy concurrency on a single core.
    """
    energies = np.asarray(energies_nj, dtype=float)
    if energies.size == 0:
        raise ValueError("energy list must not be empty")
    if np.any(np.diff(energies) <= 0):
        raise ValueError("energies must be strictly increasing")
    signal = signal if signal is not None else SignalSpec()
    grid = grid if grid is not None else _auto_grid(length_m)
    opts = opts if opts is not None else default_sweep_options(length_m)
    run_fiber = fiber.with_(length=float(length_m), f_R=float(f_R))

    if gamma_x_per_m is None:
        gamma_x_per_m = xpm_coefficient(signal.wavelength, grid.carrier_wavelength,
                                        run_fiber) * 1e-3
    d_w = (walkoff_ps_per_m(signal.wavelength, grid.carrier_wavelength, run_fiber)
           if signal.walk_off_enabled else 0.0)
    delay = _resolve_delay(signal, length_m, pump_fwhm_ps, d_w)

    a0 = np.zeros((energies.size, grid.n), dtype=complex)
    for i, e in enumerate(energies):
        if e > 0.0:
            a0[i] = gaussian_pulse(pump_fwhm_ps, e, grid).a

    integ = XpmIntegrator(grid, length_m, d_w, batch_shape=(energies.size,))
    try:
        propagate_batch(a0, grid, run_fiber, opts, observer=integ)
    except SolverError as exc:
        raise SolverError(
            f"energy sweep failed ({length_m} m, {pump_fwhm_ps} ps, f_R={f_R}): {exc}"
        ) from exc
    phi = integ.phase(gamma_x_per_m)

    points = []
    for i, e in enumerate(energies):
        prof = PhaseProfile(tau=integ.tau, phi=phi[i])
        if signal.delay_mode == "max" and signal.walk_off_enabled:
            t_of_tau = np.sin(prof.phi / 2.0) ** 2
            center = float(prof.tau[np.argmax(t_of_tau)])
        else:
            center = delay
        t, r = switch_probabilities(prof, signal, delay_ps=center)
        phase_c = float(np.interp(center, prof.tau, prof.phi))
        points.append(SwitchPoint(pump_energy=float(e), T=t, R=r,
                                  phase_at_signal_center=phase_c))
    meta = {
        "length_m": float(length_m), "pump_fwhm_ps": float(pump_fwhm_ps),
        "f_R": float(f_R), "signal_wavelength_nm": signal.wavelength,
        "signal_fwhm_ps": signal.fwhm, "delay_mode": signal.delay_mode,
        "walk_off": signal.walk_off_enabled,
        "gamma_x_per_m": float(gamma_x_per_m), "d_w_ps_per_m": float(d_w),
    }
    if delay is not None:
        meta["delay_ps"] = float(delay)
    if keep_profiles:
        return SwitchCurve(points=points, metadata=meta,
                           tau=integ.tau.copy(), profiles=phi)
    return SwitchCurve(points=points, metadata=meta)


def peak_energy_estimate_nj(fiber: FiberSpec, signal: SignalSpec,
                            carrier_nm=1550.0):
    """Undepleted walk-through estimate of the first switching peak,
    E_peak = pi |d_w| / (2 gamma_x)."""
    gamma_x = xpm_coefficient(signal.wavelength, carrier_nm, fiber) * 1e-3
    d_w = abs(walkoff_ps_per_m(signal.wavelength, carrier_nm, fiber)) * 1e-12
    return np.pi * d_w / (2.0 * gamma_x) * 1e9


# ---------------------------------------------------------------------------
# threshold spans
# ---------------------------------------------------------------------------

def span_for_threshold(curve: SwitchCurve, theta=0.95, evaluator=None,
                       resolution_nj=0.01) -> SpanResult:
    """Maximal contiguous energy interval with T >= theta around the first
    T maximum.

    `evaluator(array of energies) -> array of T` runs fresh propagations to
    refine the crossings by bisection down to resolution_nj; without it the
    edges are linearly interpolated from the sampled curve.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    e = curve.energies
    t = curve.transmissions
    above = np.nonzero(t >= theta)[0]
    if above.size == 0:
        return SpanResult(theta=theta, e_lo=float("nan"), e_hi=float("nan"),
                          found=False)
    i0 = above[0]
    i1 = i0
    while i1 + 1 < len(t) and t[i1 + 1] >= theta:
        i1 += 1

    lo_bracket = (e[i0 - 1], e[i0]) if i0 > 0 else None
    hi_bracket = (e[i1], e[i1 + 1]) if i1 + 1 < len(e) else None

    def interp_edge(bracket, rising):
        if bracket is None:
            return e[i0] if rising else e[i1]
        ea, eb = bracket
        ta = float(np.interp(ea, e, t))
        tb = float(np.interp(eb, e, t))
        if ta == tb:
            return ea if rising else eb
        return ea + (theta - ta) / (tb - ta) * (eb - ea)

    if evaluator is None:
        return SpanResult(theta=theta, e_lo=float(interp_edge(lo_bracket, True)),
                          e_hi=float(interp_edge(hi_bracket, False)))

    lo = list(lo_bracket) if lo_bracket else None
    hi = list(hi_bracket) if hi_bracket else None
    while True:
        queries = []
        if lo is not None and lo[1] - lo[0] > resolution_nj:
            queries.append(("lo", 0.5 * (lo[0] + lo[1])))
        if hi is not None and hi[1] - hi[0] > resolution_nj:
            queries.append(("hi", 0.5 * (hi[0] + hi[1])))
        if not queries:
            break
        ts = np.atleast_1d(evaluator(np.array([q[1] for q in queries])))
        for (side, mid), tm in zip(queries, ts):
            if side == "lo":
                if tm >= theta:
                    lo[1] = mid
                else:
                    lo[0] = mid
            else:
                if tm >= theta:
                    hi[0] = mid
                else:
                    hi[1] = mid
    e_lo = 0.5 * (lo[0] + lo[1]) if lo is not None else float(e[i0])
    e_hi = 0.5 * (hi[0] + hi[1]) if hi is not None else float(e[i1])
    return SpanResult(theta=theta, e_lo=float(e_lo), e_hi=float(e_hi))


def span_from_profiles(curve: SwitchCurve, signal: SignalSpec = None,
                       theta=0.95, resolution_nj=0.005) -> SpanResult:
    """Threshold span from a curve carrying phase profiles, without further
    propagations.

    The XPM phase at fixed tau is smooth (near-linear with a gentle Raman
    saturation) in pump energy, so a cubic interpolation of phi(tau; E)
    through the sampled energies resolves the T >= theta crossings far below
    the coarse energy spacing.
    """
    if curve.profiles is None or curve.tau is None:
        raise ValueError("curve was built without keep_profiles=True")
    if "delay_ps" not in curve.metadata:
        raise ValueError("profile interpolation needs a fixed signal delay")
    from scipy.interpolate import CubicSpline

    signal = signal if signal is not None else SignalSpec(
        wavelength=curve.metadata["signal_wavelength_nm"],
        fwhm=curve.metadata["signal_fwhm_ps"])
    center = curve.metadata["delay_ps"]
    # only the profile under the signal's support matters
    half = 6.0 * signal.fwhm
    mask = np.abs(curve.tau - center) <= half
    tau = curve.tau[mask]
    w = _signal_weights(tau, signal.fwhm, center)

    energies = curve.energies
    spline = CubicSpline(energies, curve.profiles[:, mask], axis=0)
    dense_e = np.arange(energies[0], energies[-1] + resolution_nj / 2,
                        resolution_nj)
    phi = spline(dense_e)
    t_dense = np.clip(np.sin(phi / 2.0) ** 2 @ w, 0.0, 1.0)
    pts = [SwitchPoint(pump_energy=float(e), T=float(t), R=1.0 - float(t),
                       phase_at_signal_center=0.0)
           for e, t in zip(dense_e, t_dense)]
    return span_for_threshold(SwitchCurve(points=pts, metadata={}), theta=theta)


@dataclass
class SpanTableRow:
    length_m: float
    pump_fwhm_ps: float
    f_R: float
    span: SpanResult | None
    error: str | None = None


def make_span_evaluator(fiber, length_m, pump_fwhm_ps, f_R, signal, grid=None,
                        opts=None, gamma_x_per_m=None):
    """Vectorized T(E) evaluator running fresh (batched) propagations."""

    def evaluate(energies):
        energies = np.sort(np.atleast_1d(np.asarray(energies, dtype=float)))
        curve = energy_sweep(fiber, length_m, pump_fwhm_ps, energies, f_R,
                             signal=signal, grid=grid, opts=opts,
                             gamma_x_per_m=gamma_x_per_m)
        return curve.transmissions

    return evaluate


def span_vs_length(fiber: FiberSpec, lengths_m, pump_fwhms_ps=(4.0, 5.0, 6.0),
                   f_r_values=(0.0, 0.18), signal: SignalSpec = None,
                   theta=0.95, points_per_lobe=12, energy_window=(0.55, 1.9),
                   opts=None, resolution_nj=0.005, refine="profiles"):
    """Grid of threshold spans over (length, pump width, f_R).

    Per-cell failures are recorded in the row instead of aborting the table.
    The coarse energies cover the first switching lobe around the
    walk-through peak estimate.  `refine` selects the edge refinement:
    "profiles" (interpolate the phase profiles in energy; no extra
    propagations), "bisect" (fresh propagations per bisection step), or
    None (linear interpolation of the coarse T samples).
    """
    signal = signal if signal is not None else SignalSpec()
    e_peak = peak_energy_estimate_nj(fiber, signal)
    energies = np.linspace(energy_window[0] * e_peak, energy_window[1] * e_peak,
                           int(points_per_lobe))
    rows = []
    for length in lengths_m:
        for fwhm in pump_fwhms_ps:
            for f_r in f_r_values:
                try:
                    curve = energy_sweep(fiber, length, fwhm, energies, f_r,
                                         signal=signal, opts=opts,
                                         keep_profiles=(refine == "profiles"))
                    if refine == "profiles":
                        span = span_from_profiles(curve, signal, theta=theta,
                                                  resolution_nj=resolution_nj)
                    else:
                        evaluator = (make_span_evaluator(
                            fiber, length, fwhm, f_r, signal, opts=opts)
                            if refine == "bisect" else None)
                        span = span_for_threshold(curve, theta=theta,
                                                  evaluator=evaluator,
                                                  resolution_nj=resolution_nj)
                    rows.append(SpanTableRow(length, fwhm, f_r, span))
                except SolverError as exc:
                    rows.append(SpanTableRow(length, fwhm, f_r, None, str(exc)))
    return rows
