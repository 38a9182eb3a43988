"""Material and waveguide model of a step-index single-mode fiber (SMF-28).

Loss spectrum, chromatic dispersion, LP01 mode / effective area, Kerr
coefficient and the delayed Raman response kernel.  All public functions
take and return engineering units (nm, um, ps, fs, dB/km, W^-1 km^-1);
internal mode-solver math is done in SI.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace, field

import numpy as np
from scipy.constants import c as C_M_S
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import j0, j1, k0, k1

C_NM_PS = C_M_S * 1e-3          # speed of light in nm/ps
V_SINGLE_MODE = 2.405           # LP11 cutoff of a step-index fiber

__all__ = [
    "FiberSpec",
    "DispersionCoeffs",
    "RamanKernel",
    "FiberModelError",
    "MultimodeError",
    "loss_coefficient",
    "loss_alpha_per_m",
    "dispersion_D",
    "taylor_betas",
    "beta1_relative",
    "v_number",
    "lp01_mode",
    "lp01_effective_area",
    "mutual_effective_area",
    "kerr_coefficient",
    "xpm_coefficient",
    "raman_kernel",
]


class FiberModelError(ValueError):
    """Invalid fiber parameters or arguments outside the model's domain."""


class MultimodeError(FiberModelError):
    """Fiber supports more than the LP01 mode at the requested wavelength."""

    def __init__(self, wavelength_nm, v):
        self.wavelength_nm = wavelength_nm
        self.v = v
        super().__init__(
            f"fiber is not single-mode at {wavelength_nm} nm: V = {v:.4f} >= {V_SINGLE_MODE}"
        )


@dataclass(frozen=True)
class FiberSpec:
    """All material/waveguide constants of the fiber.

    Defaults reproduce SMF-28: 8.2 um core diameter, 0.36% index step,
    the two-term loss model (IR absorption + Rayleigh scattering) and the
    Corning dispersion fit D(lambda) = S0 (lambda - lambda0^4/lambda^3)/4.
    """

    core_radius: float = 4.1        # um
    cladding_index: float = 1.444
    index_step: float = 0.0036      # fractional Delta
    n2: float = 2.2e-20             # m^2/W (standard silica value)
    loss_A: float = 5e11            # dB/km, IR absorption amplitude
    loss_B: float = 49.0            # um
    loss_C: float = 0.8             # um^4 dB/km, Rayleigh
    disp_S0: float = 0.08           # ps/(nm^2 km)
    disp_lambda0: float = 1313.0    # nm, zero-dispersion wavelength
    f_R: float = 0.18               # Raman fraction
    tau1: float = 12.2              # fs
    tau2: float = 32.0              # fs
    length: float = 100.0           # m

    def __post_init__(self):
        positive = {
            "core_radius": self.core_radius,
            "cladding_index": self.cladding_index,
            "index_step": self.index_step,
            "n2": self.n2,
            "disp_S0": self.disp_S0,
            "disp_lambda0": self.disp_lambda0,
            "tau1": self.tau1,
            "tau2": self.tau2,
            "length": self.length,
        }
        for name, value in positive.items():
            if not value > 0:
                raise FiberModelError(f"{name} must be strictly positive, got {value}")
        for name, value in (("loss_A", self.loss_A),
                            ("loss_B", self.loss_B),
                            ("loss_C", self.loss_C)):
            if value < 0:
                raise FiberModelError(f"{name} must be non-negative, got {value}")
        if not 0.0 <= self.f_R <= 1.0:
            raise FiberModelError(f"f_R must lie in [0, 1], got {self.f_R}")

    @property
    def numerical_aperture(self):
        return self.cladding_index * np.sqrt(2.0 * self.index_step)

    def with_(self, **kwargs) -> "FiberSpec":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class DispersionCoeffs:
    """Taylor coefficients of beta(omega) about a reference wavelength."""

    lambda_ref: float               # nm
    beta2: float                    # ps^2/km
    beta3: float                    # ps^3/km
    beta4: float | None = None      # ps^4/km

    def as_list(self):
        betas = [self.beta2, self.beta3]
        if self.beta4 is not None:
            betas.append(self.beta4)
        return betas


# ---------------------------------------------------------------------------
# loss
# ---------------------------------------------------------------------------

def loss_coefficient(lambda_um, spec: FiberSpec = None):
    """Attenuation in dB/km at wavelength lambda (um).

    Two-term model: IR absorption A*exp(-B/lambda) plus Rayleigh C/lambda^4.
    Accepts scalars or arrays.
    """
    spec = spec if spec is not None else FiberSpec()
    lam = np.asarray(lambda_um, dtype=float)
    if np.any(lam <= 0):
        raise FiberModelError("wavelength must be strictly positive")
    out = spec.loss_A * np.exp(-spec.loss_B / lam) + spec.loss_C / lam ** 4
    return out if out.ndim else float(out)


def loss_alpha_per_m(lambda_um, spec: FiberSpec = None):
    """Power attenuation coefficient alpha in 1/m (applied as alpha/2 on the field)."""
    db_km = loss_coefficient(lambda_um, spec)
    return db_km * (np.log(10.0) / 10.0) / 1000.0


# ---------------------------------------------------------------------------
# dispersion
# ---------------------------------------------------------------------------

def dispersion_D(lambda_nm, spec: FiberSpec = None):
    """Dispersion parameter D(lambda) in ps/(nm km)."""
    spec = spec if spec is not None else FiberSpec()
    lam = np.asarray(lambda_nm, dtype=float)
    if np.any(lam <= 0):
        raise FiberModelError("wavelength must be strictly positive")
    out = spec.disp_S0 * (lam - spec.disp_lambda0 ** 4 / lam ** 3) / 4.0
    return out if out.ndim else float(out)


def taylor_betas(lambda_ref_nm, max_order=4, spec: FiberSpec = None) -> DispersionCoeffs:
    """Dispersion Taylor coefficients beta2..beta4 at lambda_ref.

    Obtained by analytic differentiation of the closed-form D(lambda):

        beta2 = -(S0/(8 pi c)) (lam^3 - lam0^4 / lam)
        beta3 =  (S0/(16 pi^2 c^2)) (3 lam^4 + lam0^4)
        beta4 = -(3 S0/(8 pi^3 c^3)) lam^5

    Units: ps^k/km with c in nm/ps and lambda in nm.
    """
    spec = spec if spec is not None else FiberSpec()
    if not 1200.0 <= lambda_ref_nm <= 1700.0:
        raise FiberModelError(
            f"lambda_ref must lie in [1200, 1700] nm, got {lambda_ref_nm}")
    if max_order not in (2, 3, 4):
        raise FiberModelError(f"max_order must be 2, 3 or 4, got {max_order}")
    lam = float(lambda_ref_nm)
    lam0 = spec.disp_lambda0
    s0 = spec.disp_S0
    # S0 ps/(nm^2 km) times nm^(k+1)/(nm/ps)^(k-1) gives ps^k/km directly
    beta2 = -(s0 / (8.0 * np.pi * C_NM_PS)) * (lam ** 3 - lam0 ** 4 / lam)
    beta3 = None
    beta4 = None
    if max_order >= 3:
        beta3 = (s0 / (16.0 * np.pi ** 2 * C_NM_PS ** 2)) * (3.0 * lam ** 4 + lam0 ** 4)
    if max_order >= 4:
        beta4 = -(3.0 * s0 / (8.0 * np.pi ** 3 * C_NM_PS ** 3)) * lam ** 5
    return DispersionCoeffs(lambda_ref=lam, beta2=beta2,
                            beta3=beta3 if beta3 is not None else 0.0,
                            beta4=beta4)


def beta1_relative(lambda_nm, lambda_ref_nm, spec: FiberSpec = None):
    """Group delay per length beta1(lambda) - beta1(lambda_ref) in ps/km.

    Exact integral of the closed-form D(lambda):
    beta1(l2) - beta1(l1) = (S0/8) (l^2 + lam0^4/l^2) |_{l1}^{l2}.
    """
    spec = spec if spec is not None else FiberSpec()

    def antiderivative(lam):
        return spec.disp_S0 / 8.0 * (lam ** 2 + spec.disp_lambda0 ** 4 / lam ** 2)

    # nm^2 * ps/(nm^2 km) = ps/km
    return antiderivative(float(lambda_nm)) - antiderivative(float(lambda_ref_nm))


# ---------------------------------------------------------------------------
# LP01 mode
# ---------------------------------------------------------------------------

def v_number(lambda_nm, spec: FiberSpec = None):
    """Normalized frequency V = 2 pi a NA / lambda."""
    spec = spec if spec is not None else FiberSpec()
    lam_um = float(lambda_nm) * 1e-3
    if lam_um <= 0:
        raise FiberModelError("wavelength must be strictly positive")
    return 2.0 * np.pi * spec.core_radius * spec.numerical_aperture / lam_um


def _lp01_u(v):
    """Core parameter u of the LP01 mode from the scalar eigenvalue equation.

    Solves u J1(u)/J0(u) = w K1(w)/K0(w) with w = sqrt(V^2 - u^2) by
    bracketed root finding; LP01 always exists for V > 0.
    """

    def residual(u):
        w = np.sqrt(max(v * v - u * u, 1e-300))
        return u * j1(u) / j0(u) - w * k1(w) / k0(w)

    # u lies below both V and the first zero of J0 (2.405)
    hi = min(v, 2.404825557695773) * (1.0 - 1e-12)
    lo = 1e-9
    # residual(lo) < 0, residual -> +inf as u -> hi (J0 -> 0 or w -> 0)
    return brentq(residual, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)


def lp01_mode(lambda_nm, spec: FiberSpec = None, require_single_mode=True):
    """LP01 mode parameters (u, w, V) at the given wavelength.

    Raises MultimodeError when V >= 2.405 and require_single_mode is set.
    """
    spec = spec if spec is not None else FiberSpec()
    v = v_number(lambda_nm, spec)
    if require_single_mode and v >= V_SINGLE_MODE:
        raise MultimodeError(lambda_nm, v)
    if v <= 0.3:
        # guided but absurdly weakly; quadrature below would not converge
        raise FiberModelError(
            f"no usefully guided LP01 mode at {lambda_nm} nm (V = {v:.3f})")
    u = _lp01_u(v)
    w = np.sqrt(v * v - u * u)
    return u, w, v


def _lp01_profile(u, w, a_um):
    """Radial field F(r), continuous at the core boundary, F(0) scaled to 1/J0 form."""

    def f(r_um):
        if r_um <= a_um:
            return j0(u * r_um / a_um) / j0(u)
        return k0(w * r_um / a_um) / k0(w)

    return f


def lp01_effective_area(lambda_nm, spec: FiberSpec = None, require_single_mode=True):
    """Effective area (int |F|^2 dA)^2 / int |F|^4 dA of the LP01 mode, in um^2."""
    spec = spec if spec is not None else FiberSpec()
    u, w, _ = lp01_mode(lambda_nm, spec, require_single_mode)
    a = spec.core_radius
    f = _lp01_profile(u, w, a)
    r_max = a * (1.0 + 40.0 / w)   # K0 tail decayed far below quadrature tolerance

    i2 = _radial_integral(lambda r: f(r) ** 2, a, r_max)
    i4 = _radial_integral(lambda r: f(r) ** 4, a, r_max)
    return i2 * i2 / i4


def _radial_integral(g, a, r_max):
    """int_0^inf g(r) 2 pi r dr split at the index step."""
    core, _ = quad(lambda r: g(r) * r, 0.0, a, epsabs=0.0, epsrel=1e-10, limit=200)
    clad, _ = quad(lambda r: g(r) * r, a, r_max, epsabs=0.0, epsrel=1e-10, limit=200)
    return 2.0 * np.pi * (core + clad)


def mutual_effective_area(lambda_a_nm, lambda_b_nm, spec: FiberSpec = None,
                          require_single_mode=False):
    """Cross effective area of two LP01 modes at different wavelengths, um^2.

    A_ab = (int |Fa|^2 dA)(int |Fb|^2 dA) / int |Fa|^2 |Fb|^2 dA.
    Reduces to lp01_effective_area when the wavelengths coincide.  The LP01
    profile is well defined for any V, so the single-mode guard is opt-in
    here (a 1310 nm probe in this fiber sits at V = 2.41, a hair above the
    LP11 cutoff).
    """
    spec = spec if spec is not None else FiberSpec()
    a = spec.core_radius
    ua, wa, _ = lp01_mode(lambda_a_nm, spec, require_single_mode)
    ub, wb, _ = lp01_mode(lambda_b_nm, spec, require_single_mode)
    fa = _lp01_profile(ua, wa, a)
    fb = _lp01_profile(ub, wb, a)
    r_max = a * (1.0 + 40.0 / min(wa, wb))
    i2a = _radial_integral(lambda r: fa(r) ** 2, a, r_max)
    i2b = _radial_integral(lambda r: fb(r) ** 2, a, r_max)
    iab = _radial_integral(lambda r: fa(r) ** 2 * fb(r) ** 2, a, r_max)
    return i2a * i2b / iab


def kerr_coefficient(lambda_nm, spec: FiberSpec = None, require_single_mode=True):
    """Kerr coefficient gamma = 2 pi n2 / (lambda A_eff) in W^-1 km^-1."""
    spec = spec if spec is not None else FiberSpec()
    a_eff_um2 = lp01_effective_area(lambda_nm, spec, require_single_mode)
    gamma_per_m = 2.0 * np.pi * spec.n2 / (float(lambda_nm) * 1e-9 * a_eff_um2 * 1e-12)
    return gamma_per_m * 1e3


def xpm_coefficient(lambda_signal_nm, lambda_pump_nm, spec: FiberSpec = None,
                    require_single_mode=False):
    """Cross-phase-modulation coefficient seen by the signal, W^-1 km^-1.

    gamma_x = n2 omega_s / (c A_mutual) with the pump/signal mode-overlap
    area; the usual factor 2 for co-polarized waves is applied in the phase
    integral, not here.
    """
    spec = spec if spec is not None else FiberSpec()
    a_x = mutual_effective_area(lambda_signal_nm, lambda_pump_nm, spec,
                                require_single_mode)
    gamma_per_m = 2.0 * np.pi * spec.n2 / (float(lambda_signal_nm) * 1e-9 * a_x * 1e-12)
    return gamma_per_m * 1e3


# ---------------------------------------------------------------------------
# Raman response
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RamanKernel:
    """Sampled delayed Raman response plus its frequency-domain transfer function.

    The nonlinear response is R(t) = (1 - f_R) delta(t) + f_R h_R(t); the
    delta is never discretized, only its weight is stored.  `samples` hold
    h_R(k dt) for k = 0..n-1 (causal by construction), rescaled so the
    trapezoid integral is exactly 1 at the working dt.  `spectrum` is the
    analytic transform h~(Omega) = ((tau1^2+tau2^2)/tau2^2) /
    ((1/tau2 - i Omega)^2 tau1^2 + 1), evaluated on the grid frequencies,
    which keeps the DC response exactly 1 regardless of dt.
    """

    dt: float                       # fs
    f_R: float
    samples: np.ndarray             # 1/fs, length n
    spectrum: np.ndarray            # dimensionless, FFT ordering

    @property
    def instantaneous_weight(self):
        return 1.0 - self.f_R


def raman_response_time(t_fs, tau1=12.2, tau2=32.0):
    """h_R(t) = ((tau1^2+tau2^2)/(tau1 tau2^2)) exp(-t/tau2) sin(t/tau1), zero for t < 0."""
    t = np.asarray(t_fs, dtype=float)
    pre = (tau1 ** 2 + tau2 ** 2) / (tau1 * tau2 ** 2)
    out = np.where(t >= 0.0, pre * np.exp(-np.clip(t, 0.0, None) / tau2) * np.sin(t / tau1), 0.0)
    return out


def raman_response_spectrum(omega_rad_fs, tau1=12.2, tau2=32.0):
    """Analytic h~(Omega) = int h_R(t) exp(i Omega t) dt; h~(0) = 1 exactly."""
    om = np.asarray(omega_rad_fs, dtype=complex)
    pre = (tau1 ** 2 + tau2 ** 2) / (tau1 * tau2 ** 2)
    return pre * (1.0 / tau1) / ((1.0 / tau2 - 1j * om) ** 2 + 1.0 / tau1 ** 2)


def raman_kernel(dt_fs, n_samples, f_R, tau1=12.2, tau2=32.0) -> RamanKernel:
    """Build the Raman kernel for a propagation grid of n_samples at spacing dt.

    The time samples are renormalized to unit trapezoid integral so the
    kernel's DC Raman strength is not distorted at coarse dt; the cached
    spectrum is the analytic transform, exact at every grid frequency.
    """
    if dt_fs <= 0:
        raise FiberModelError(f"dt must be positive, got {dt_fs}")
    if n_samples < 2:
        raise FiberModelError("kernel needs at least two samples")
    if not 0.0 <= f_R <= 1.0:
        raise FiberModelError(f"f_R must lie in [0, 1], got {f_R}")
    # the convolution uses the analytic transfer function, so the only hard
    # requirement is that the band comfortably contains the ~13 THz gain peak
    nyquist_thz = 0.5e3 / dt_fs
    if nyquist_thz < 26.0:
        warnings.warn(
            f"dt = {dt_fs:.3g} fs gives a Nyquist band of {nyquist_thz:.0f} THz, "
            "barely twice the Raman shift; expect aliased Raman products",
            RuntimeWarning, stacklevel=2)
    t = np.arange(n_samples) * dt_fs
    h = raman_response_time(t, tau1, tau2)
    integral = np.trapezoid(h, dx=dt_fs)
    if integral > 0.0:
        h = h / integral
    omega = 2.0 * np.pi * np.fft.fftfreq(n_samples, d=dt_fs)
    spec = raman_response_spectrum(omega, tau1, tau2)
    return RamanKernel(dt=float(dt_fs), f_R=float(f_R), samples=h, spectrum=spec)
