"""Fiber constants: loss/dispersion closed forms, mode solver, Raman kernel."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberloop.fiber import (
    FiberModelError, FiberSpec, MultimodeError, beta1_relative, dispersion_D,
    kerr_coefficient, loss_alpha_per_m, loss_coefficient, lp01_effective_area,
    lp01_mode, mutual_effective_area, raman_kernel, raman_response_spectrum,
    raman_response_time, taylor_betas, v_number, xpm_coefficient)

C_NM_PS = 299792.458


class TestLoss:
    def test_value_at_1550(self, fiber):
        # 5e11 * exp(-49/1.55) + 0.8/1.55^4
        assert loss_coefficient(1.55, fiber) == pytest.approx(0.14787, abs=2e-4)

    def test_alpha_conversion(self, fiber):
        db_km = loss_coefficient(1.55, fiber)
        assert loss_alpha_per_m(1.55, fiber) == pytest.approx(
            db_km * np.log(10) / 10 / 1000, rel=1e-12)

    def test_rayleigh_dominates_short_wavelengths(self, fiber):
        # at 1.0 um the C/lambda^4 term is essentially the whole loss
        assert loss_coefficient(1.0, fiber) == pytest.approx(0.8, rel=1e-6)

    @given(st.floats(min_value=1.0, max_value=1.7))
    @settings(max_examples=30, deadline=None)
    def test_positive(self, lam):
        assert loss_coefficient(lam) > 0.0

    def test_rejects_nonpositive(self, fiber):
        with pytest.raises(FiberModelError):
            loss_coefficient(0.0, fiber)


class TestDispersion:
    def test_zero_at_lambda0(self, fiber):
        assert dispersion_D(1313.0, fiber) == pytest.approx(0.0, abs=1e-12)

    def test_value_at_1550(self, fiber):
        # S0/4 * (1550 - 1313^4/1550^3)
        assert dispersion_D(1550.0, fiber) == pytest.approx(15.04, abs=0.02)

    def test_beta2_sign_flips_at_lambda0(self, fiber):
        assert taylor_betas(1550.0, spec=fiber).beta2 < 0.0
        assert taylor_betas(1250.0, spec=fiber).beta2 > 0.0

    def test_beta2_matches_d(self, fiber):
        # beta2 = -D lambda^2 / (2 pi c)
        for lam in (1310.0, 1450.0, 1550.0):
            d = dispersion_D(lam, fiber)
            expect = -d * lam ** 2 / (2 * np.pi * C_NM_PS)  # ps^2/km
            got = taylor_betas(lam, spec=fiber).beta2
            assert got == pytest.approx(expect, rel=1e-10)

    def test_beta2_value_at_1550(self, fiber):
        assert taylor_betas(1550.0, spec=fiber).beta2 == pytest.approx(
            -19.18, abs=0.02)

    @pytest.mark.parametrize("order", [3, 4])
    def test_higher_betas_match_finite_differences(self, fiber, order):
        # beta_{k+1} = d beta_k / d omega; compare the analytic beta3/beta4
        # against centered differences of beta2/beta3 in omega.
        lam = 1550.0
        omega0 = 2 * np.pi * C_NM_PS / lam
        d_om = omega0 * 1e-5
        lam_p = 2 * np.pi * C_NM_PS / (omega0 + d_om)
        lam_m = 2 * np.pi * C_NM_PS / (omega0 - d_om)
        lower = "beta2" if order == 3 else "beta3"
        hi = getattr(taylor_betas(lam_p, spec=fiber), lower)
        lo = getattr(taylor_betas(lam_m, spec=fiber), lower)
        fd = (hi - lo) / (2 * d_om)
        analytic = getattr(taylor_betas(lam, spec=fiber), f"beta{order}")
        assert analytic == pytest.approx(fd, rel=1e-4)

    def test_beta1_relative_consistent_with_d(self, fiber):
        # D = d(beta1)/d(lambda)  =>  beta1(l2)-beta1(l1) = int D dlambda
        l1, l2 = 1500.0, 1560.0
        lam = np.linspace(l1, l2, 20001)
        integral = np.trapezoid(dispersion_D(lam, fiber), lam)  # ps/km
        got = beta1_relative(l2, l1, fiber)
        assert got == pytest.approx(integral, rel=1e-8)

    def test_walkoff_1310_vs_1550(self, fiber):
        # group-delay slip between the paper's signal and pump wavelengths
        d = beta1_relative(1310.0, 1550.0, fiber) * 1e-3  # ps/m
        assert d == pytest.approx(-1.916, abs=0.01)

    def test_domain_guard(self, fiber):
        with pytest.raises(FiberModelError):
            taylor_betas(900.0, spec=fiber)


class TestMode:
    def test_v_number_1550(self, fiber):
        assert v_number(1550.0, fiber) == pytest.approx(2.036, abs=0.005)

    def test_single_mode_guard(self, fiber):
        # V crosses 2.405 just below ~1311 nm for these parameters
        with pytest.raises(MultimodeError):
            lp01_mode(1250.0, fiber)
        lp01_mode(1250.0, fiber, require_single_mode=False)

    def test_eigenvalue_consistency(self, fiber):
        u, w, v = lp01_mode(1550.0, fiber)
        assert u ** 2 + w ** 2 == pytest.approx(v ** 2, rel=1e-12)
        assert 0.0 < u < 2.405

    def test_effective_area_1550(self, fiber):
        a_eff = lp01_effective_area(1550.0, fiber)
        assert 75.0 <= a_eff <= 90.0
        assert a_eff == pytest.approx(77.1, abs=0.3)

    def test_effective_area_grows_with_wavelength(self, fiber):
        # weaker confinement at longer wavelengths
        lams = np.linspace(1315.0, 1600.0, 7)
        areas = [lp01_effective_area(l, fiber, require_single_mode=False)
                 for l in lams]
        assert np.all(np.diff(areas) > 0.0)

    def test_kerr_coefficient_1550(self, fiber):
        gamma = kerr_coefficient(1550.0, fiber)
        assert 1.1 <= gamma <= 1.3
        assert gamma == pytest.approx(1.157, abs=0.01)

    def test_mutual_area_symmetric_and_bounded(self, fiber):
        a_ab = mutual_effective_area(1310.0, 1550.0, fiber)
        a_ba = mutual_effective_area(1550.0, 1310.0, fiber)
        assert a_ab == pytest.approx(a_ba, rel=1e-9)
        a_11 = lp01_effective_area(1310.0, fiber, require_single_mode=False)
        a_22 = lp01_effective_area(1550.0, fiber)
        # Cauchy-Schwarz: overlap area exceeds neither geometric bound badly
        assert min(a_11, a_22) * 0.8 < a_ab < max(a_11, a_22)

    def test_mutual_area_degenerate_limit(self, fiber):
        assert mutual_effective_area(1550.0, 1550.0, fiber) == pytest.approx(
            lp01_effective_area(1550.0, fiber), rel=1e-9)

    def test_xpm_coefficient(self, fiber):
        gx = xpm_coefficient(1310.0, 1550.0, fiber)
        assert gx == pytest.approx(1.521, abs=0.01)


class TestRaman:
    def test_causality(self):
        t = np.linspace(-100.0, 500.0, 1201)
        h = raman_response_time(t)
        assert np.all(h[t < 0.0] == 0.0)

    def test_unit_dc_response(self):
        assert raman_response_spectrum(0.0) == pytest.approx(1.0, rel=1e-14)

    def test_spectrum_matches_numerical_transform(self):
        dt = 0.05  # fs; fine enough to make the quadrature the reference
        t = np.arange(0.0, 2000.0, dt)
        h = raman_response_time(t)
        for om in (0.05, 0.082, 0.15):   # rad/fs
            num = np.trapezoid(h * np.exp(1j * om * t), dx=dt)
            assert raman_response_spectrum(om) == pytest.approx(num, rel=1e-4)

    def test_gain_peak_near_13_thz(self):
        # Im h~ peaks at the Raman shift; for this two-parameter model the
        # peak sits at sqrt(1/tau1^2 - 1/tau2^2) rad/fs ~ 13.1 THz
        nu = np.linspace(1.0, 30.0, 20000)             # THz
        om = 2 * np.pi * nu * 1e-3                     # rad/fs
        gain = raman_response_spectrum(om).imag
        assert nu[np.argmax(gain)] == pytest.approx(13.09, abs=0.05)

    def test_kernel_normalization_and_weight(self):
        k = raman_kernel(7.8, 4096, 0.18)
        assert np.trapezoid(k.samples, dx=k.dt) == pytest.approx(1.0, rel=1e-12)
        assert k.instantaneous_weight == pytest.approx(0.82)
        assert k.spectrum[0] == pytest.approx(1.0, rel=1e-14)

    def test_coarse_dt_warns(self):
        with pytest.warns(RuntimeWarning, match="Nyquist"):
            raman_kernel(25.0, 1024, 0.18)

    def test_kernel_validation(self):
        with pytest.raises(FiberModelError):
            raman_kernel(-1.0, 64, 0.18)
        with pytest.raises(FiberModelError):
            raman_kernel(1.0, 64, 1.5)


class TestFiberSpec:
    def test_defaults_roundtrip_with(self, fiber):
        other = fiber.with_(length=500.0)
        assert other.length == 500.0
        assert other.core_radius == fiber.core_radius

    def test_validation(self):
        with pytest.raises(FiberModelError):
            FiberSpec(core_radius=-1.0)
        with pytest.raises(FiberModelError):
            FiberSpec(f_R=2.0)
        with pytest.raises(FiberModelError):
            FiberSpec(length=0.0)

    @given(st.floats(min_value=1320.0, max_value=1650.0),
           st.floats(min_value=1320.0, max_value=1650.0))
    @settings(max_examples=20, deadline=None)
    def test_walkoff_antisymmetry(self, la, lb):
        assert beta1_relative(la, lb) == pytest.approx(
            -beta1_relative(lb, la), abs=1e-9)
