"""Uniform time/frequency grid, complex field envelopes and scalar measures.

Transform convention: the "analysis" transform A(t) -> A~(omega) uses
exp(+i omega t), realized as numpy's ifft (times n dt, which cancels in
every ratio used here), so that d/dt maps to -i omega.  Frequencies are
relative to the carrier and stored in standard FFT ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_M_S

__all__ = [
    "Grid",
    "Envelope",
    "GridError",
    "make_grid",
    "gaussian_pulse",
    "sech_pulse",
    "measures",
    "to_freq",
    "to_time",
    "energy_nj",
    "fwhm_ps",
    "envelope_to_csv",
    "envelope_from_csv",
]


class GridError(ValueError):
    pass


def to_freq(a, axis=-1):
    """Time samples -> spectrum under the exp(+i omega t) convention."""
    return np.fft.ifft(a, axis=axis)


def to_time(a_w, axis=-1):
    return np.fft.fft(a_w, axis=axis)


@dataclass(frozen=True)
class Grid:
    """Uniform temporal grid with an optical carrier.

    `t` spans [-window/2, window/2) in ps; `omega` holds the relative
    angular frequencies 2 pi fftfreq(n, dt) in rad/ps (FFT ordering).
    """

    n: int
    window: float                   # ps
    carrier_wavelength: float       # nm
    t: np.ndarray = field(repr=False, default=None)
    omega: np.ndarray = field(repr=False, default=None)

    @property
    def dt(self):
        return self.window / self.n

    @property
    def omega0(self):
        """Angular carrier frequency in rad/ps."""
        return 2.0 * np.pi * C_M_S * 1e-3 / self.carrier_wavelength

    @property
    def wavelengths_nm(self):
        """Absolute wavelength of each (relative) frequency bin, FFT ordering."""
        return 2.0 * np.pi * C_M_S * 1e-3 / (self.omega0 + self.omega)


def make_grid(n, window_ps, carrier_wavelength_nm) -> Grid:
    """Build a grid of n samples (power of two) over `window_ps` picoseconds."""
    if n < 2 or (n & (n - 1)) != 0:
        raise GridError(f"sample count must be a power of two, got {n}")
    if window_ps <= 0:
        raise GridError(f"window must be positive, got {window_ps}")
    if carrier_wavelength_nm <= 0:
        raise GridError("carrier wavelength must be positive")
    dt = window_ps / n
    t = (np.arange(n) - n // 2) * dt
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
    return Grid(n=int(n), window=float(window_ps),
                carrier_wavelength=float(carrier_wavelength_nm), t=t, omega=omega)


@dataclass(frozen=True)
class Envelope:
    """Complex field A(t) in sqrt(W) on a grid, at position z along the fiber."""

    grid: Grid
    a: np.ndarray                   # complex, sqrt(W)
    z: float = 0.0                  # m

    def copy_with(self, a=None, z=None):
        return Envelope(self.grid, self.a if a is None else a,
                        self.z if z is None else z)


def gaussian_pulse(fwhm_ps, energy_nj_, grid: Grid, center_ps=0.0) -> Envelope:
    """Transform-limited Gaussian, intensity FWHM `fwhm_ps`, energy in nJ.

    A(t) = sqrt(P0) exp(-(t - tc)^2 / (2 T0^2)) with T0 = fwhm / (2 sqrt(ln 2))
    and P0 = E / (sqrt(pi) T0).
    """
    if fwhm_ps <= 0 or energy_nj_ < 0:
        raise GridError("fwhm must be positive and energy non-negative")
    t0 = fwhm_ps / (2.0 * np.sqrt(np.log(2.0)))
    if fwhm_ps < 16 * grid.dt:
        raise GridError(
            f"fwhm {fwhm_ps} ps resolved by fewer than 16 samples (dt = {grid.dt} ps)")
    # -80 dB intensity level sits at t0 sqrt(8 ln 10) from center; require it
    # inside the window and the window at least 10 pulse widths wide
    edge80 = t0 * np.sqrt(8.0 * np.log(10.0))
    half_span = grid.window / 2.0 - abs(center_ps)
    if edge80 > half_span or grid.window < 10.0 * fwhm_ps:
        raise GridError(
            f"pulse too wide for window: -80 dB half-width {edge80:.1f} ps vs "
            f"{half_span:.1f} ps available (window must also span 10x fwhm)")
    p0 = energy_nj_ * 1e-9 / (np.sqrt(np.pi) * t0 * 1e-12)
    a = np.sqrt(p0) * np.exp(-((grid.t - center_ps) ** 2) / (2.0 * t0 ** 2))
    return Envelope(grid, a.astype(complex), z=0.0)


def sech_pulse(t0_ps, peak_power_w, grid: Grid, center_ps=0.0) -> Envelope:
    """sqrt(P0) sech(t/T0); test fixture for the soliton oracle."""
    a = np.sqrt(peak_power_w) / np.cosh((grid.t - center_ps) / t0_ps)
    return Envelope(grid, a.astype(complex), z=0.0)


def energy_nj(env: Envelope):
    """Pulse energy sum(|A|^2) dt in nJ (rectangle rule)."""
    return float(np.sum(np.abs(env.a) ** 2) * env.grid.dt * 1e-3)
    # W * ps = 1e-12 J; report nJ -> factor 1e-3


def fwhm_ps(env: Envelope):
    """Intensity FWHM by linear interpolation at the outermost half-max crossings."""
    p = np.abs(env.a) ** 2
    peak = p.max()
    if peak == 0.0:
        raise GridError("FWHM undefined for an all-zero field")
    half = peak / 2.0
    above = p >= half
    idx = np.nonzero(above)[0]
    i_lo, i_hi = idx[0], idx[-1]
    t = env.grid.t
    if i_lo == 0:
        t_lo = t[0]
    else:
        f = (half - p[i_lo - 1]) / (p[i_lo] - p[i_lo - 1])
        t_lo = t[i_lo - 1] + f * (t[i_lo] - t[i_lo - 1])
    if i_hi == len(p) - 1:
        t_hi = t[-1]
    else:
        f = (half - p[i_hi + 1]) / (p[i_hi] - p[i_hi + 1])
        t_hi = t[i_hi + 1] - f * (t[i_hi + 1] - t[i_hi])
    return float(t_hi - t_lo)


def spectrum_wavelength(env: Envelope):
    """Spectral power density vs wavelength (nm), sorted by wavelength.

    Density is |A~(omega)|^2 times the Jacobian 2 pi c / lambda^2 so that it
    integrates like a per-nm density.
    """
    spec = np.abs(to_freq(env.a)) ** 2
    lam = env.grid.wavelengths_nm
    order = np.argsort(lam)
    lam = lam[order]
    density = spec[order] * (2.0 * np.pi * C_M_S * 1e-3) / lam ** 2
    return lam, density


def mean_frequency_offset_thz(env: Envelope):
    """First moment of |A~(omega)|^2 relative to the carrier, in THz."""
    spec = np.abs(to_freq(env.a)) ** 2
    total = spec.sum()
    if total == 0.0:
        raise GridError("mean frequency undefined for an all-zero field")
    mean_omega = float(np.sum(env.grid.omega * spec) / total)   # rad/ps
    return mean_omega / (2.0 * np.pi)                           # 1/ps = THz


def measures(env: Envelope) -> dict:
    """Scalar diagnostics of an envelope.

    Returns energy (nJ), intensity FWHM (ps), peak power (W), the spectrum
    as (wavelength_nm, density) arrays and the mean frequency offset (THz).
    """
    lam, density = spectrum_wavelength(env)
    return {
        "energy": energy_nj(env),
        "fwhm": fwhm_ps(env),
        "peak_power": float(np.max(np.abs(env.a) ** 2)),
        "spectrum": (lam, density),
        "mean_frequency_offset": mean_frequency_offset_thz(env),
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

ENVELOPE_HEADER = "t_ps,re_a_sqrtW,im_a_sqrtW"


def envelope_to_csv(env: Envelope, path):
    """Three-column CSV: t [ps], Re A, Im A [sqrt(W)]."""
    with open(path, "w") as fh:
        fh.write(f"# carrier_nm={env.grid.carrier_wavelength:.9g} "
                 f"window_ps={env.grid.window:.9g} n={env.grid.n} z_m={env.z:.9g}\n")
        fh.write(ENVELOPE_HEADER + "\n")
        for t, a in zip(env.grid.t, env.a):
            fh.write(f"{t:.9g},{a.real:.9g},{a.imag:.9g}\n")


def envelope_from_csv(path) -> Envelope:
    with open(path) as fh:
        meta_line = fh.readline()
        if not meta_line.startswith("#"):
            raise GridError(f"{path}: missing envelope metadata header")
        meta = dict(item.split("=") for item in meta_line[1:].split())
        header = fh.readline().strip()
        if header != ENVELOPE_HEADER:
            raise GridError(f"{path}: unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",")
    grid = make_grid(int(meta["n"]), float(meta["window_ps"]), float(meta["carrier_nm"]))
    a = data[:, 1] + 1j * data[:, 2]
    return Envelope(grid, a, z=float(meta["z_m"]))
