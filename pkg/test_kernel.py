"""
Tests for the bath correlation and the decoherence kernel k(t)
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from src.exceptions import DomainError
from src.kernel.decoherence_kernel import (
    SERIES_THRESHOLD,
    CorrelationPrefactor,
    KernelVariant,
    NoiseParams,
    bath_correlation,
    bath_correlation_at_origin,
    bath_correlation_frequency_integral,
    gaussian_rho11,
    integrated_sine_term,
    kernel_k,
    kernel_k_at_time,
    kernel_k_double_integral,
    kernel_k_quadratic,
    kernel_k_variant,
    sine_integral_term,
)
from src.specfun.quadrature import integrate_adaptive
from src.specfun.special_functions import si_standard


def _i1_oracle(x, w):
    """integral_0^x Si(w u) du by scipy adaptive quadrature over t = w u"""
    value, _ = integrate.quad(lambda t: special.sici(t)[0], 0.0, w * x, limit=5000, epsabs=0.0, epsrel=1e-11)
    return value / w


@pytest.fixture
def params():
    return NoiseParams(gamma0=1e-3, delta0=1e-3, omega_c_tau_s=10.0)


class TestNoiseParams:
    def test_from_coupling(self):
        p = NoiseParams.from_coupling(7e-3, 100.0)
        assert p.gamma0 == pytest.approx(7e-5)
        assert p.coupling == pytest.approx(7e-3)
        assert p.delta0 == 0.0

    @pytest.mark.parametrize("kwargs", [
        {"gamma0": -1e-3, "delta0": 0.0, "omega_c_tau_s": 10.0},
        {"gamma0": 1e-3, "delta0": -1.0, "omega_c_tau_s": 10.0},
        {"gamma0": 1e-3, "delta0": 0.0, "omega_c_tau_s": 0.0},
        {"gamma0": 1e-3, "delta0": 0.0, "omega_c_tau_s": 10.0, "tau_s": -1.0},
        {"gamma0": float("nan"), "delta0": 0.0, "omega_c_tau_s": 10.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            NoiseParams(**kwargs)

    def test_absolute_time_conversion(self):
        p = NoiseParams(gamma0=1e-3, delta0=0.0, omega_c_tau_s=10.0, tau_s=1e-6)
        assert p.to_x(2e-6) == pytest.approx(2.0)
        assert kernel_k_at_time(2e-6, p).re == pytest.approx(kernel_k(2.0, p).re, rel=1e-14)


class TestBathCorrelation:
    def test_origin_limit(self, params):
        gamma, delta = bath_correlation_at_origin(params)
        assert gamma == pytest.approx(2.0 / math.pi * params.gamma0 * params.omega_c_tau_s)
        assert delta == 0.0

    def test_continuous_at_origin(self, params):
        near = bath_correlation(1e-9, params)
        assert near[0] == pytest.approx(bath_correlation_at_origin(params)[0], rel=1e-12)
        assert abs(near[1]) < 1e-10

    def test_zero_of_sine(self, params):
        gamma, _ = bath_correlation(math.pi / params.omega_c_tau_s, params)
        assert gamma == pytest.approx(0.0, abs=1e-15)

    def test_series_branch_matches_direct_form(self, params):
        x_edge = SERIES_THRESHOLD / params.omega_c_tau_s
        below = bath_correlation(x_edge * (1 - 1e-9), params)
        above = bath_correlation(x_edge * (1 + 1e-9), params)
        assert below[0] == pytest.approx(above[0], rel=1e-9)
        assert below[1] == pytest.approx(above[1], rel=1e-6)

    def test_frequency_integral(self, params):
        gamma, delta = bath_correlation(0.5, params)
        oracle_gamma, oracle_delta = bath_correlation_frequency_integral(0.5, params)
        assert gamma == pytest.approx(oracle_gamma, abs=1e-6)
        assert delta == pytest.approx(oracle_delta, abs=1e-6)

    def test_printed_prefactor_ratio(self, params):
        printed, _ = bath_correlation(0.3, params, prefactor=CorrelationPrefactor.PRINTED)
        normative, _ = bath_correlation(0.3, params)
        assert printed / normative == pytest.approx(math.pi ** 2 / 4.0)

    @pytest.mark.parametrize("x", [0.0, -0.5, float("inf")])
    def test_non_positive_time_raises(self, params, x):
        with pytest.raises(DomainError):
            bath_correlation(x, params)


class TestKernel:
    def test_zero_time(self, params):
        k = kernel_k(0.0, params)
        assert (k.re, k.im) == (0.0, 0.0)

    def test_negative_time_raises(self, params):
        with pytest.raises(DomainError, match="non-negative"):
            kernel_k(-1.0, params)

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    @pytest.mark.parametrize("w", [1.0, 10.0, 100.0])
    def test_integrated_sine_against_adaptive_quadrature(self, x, w):
        oracle = integrate_adaptive(lambda u: si_standard(w * u), 0.0, x)
        assert integrated_sine_term(x, w) == pytest.approx(oracle, abs=1e-9, rel=1e-9)

    def test_closed_forms_on_log_grid(self):
        for w in np.logspace(-1, 3, 25):
            for x in np.logspace(-3, 1, 25):
                assert sine_integral_term(x, w) == pytest.approx(special.sici(w * x)[0], rel=1e-8)
                assert integrated_sine_term(x, w) == pytest.approx(_i1_oracle(x, w), rel=1e-8)

    def test_double_integral_oracle(self, params):
        closed = kernel_k(1.0, params)
        nested = kernel_k_double_integral(1.0, params)
        assert closed.re == pytest.approx(nested.re, abs=1e-6)
        assert closed.im == pytest.approx(nested.im, abs=1e-6)

    @pytest.mark.parametrize("w", [0.1, 1.0, 10.0, 100.0, 1000.0])
    def test_re_k_non_decreasing(self, w):
        p = NoiseParams(gamma0=1e-3, delta0=0.0, omega_c_tau_s=w)
        values = [kernel_k(x, p).re for x in np.linspace(0.0, 10.0, 401)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert min(values) >= 0.0

    def test_linear_scaling(self):
        base = NoiseParams(gamma0=1e-3, delta0=2e-3, omega_c_tau_s=10.0)
        doubled = NoiseParams(gamma0=2e-3, delta0=4e-3, omega_c_tau_s=10.0)
        assert kernel_k(1.3, doubled).re == pytest.approx(2.0 * kernel_k(1.3, base).re, rel=1e-14)
        assert kernel_k(1.3, doubled).im == pytest.approx(2.0 * kernel_k(1.3, base).im, rel=1e-14)

    def test_im_k_non_negative(self, params):
        assert all(kernel_k(x, params).im >= 0.0 for x in np.linspace(0.0, 5.0, 51))


class TestKernelVariants:
    def test_normative_variant_is_kernel(self, params):
        assert kernel_k_variant(1.0, params, KernelVariant.NORMATIVE) == kernel_k(1.0, params)

    def test_shifted_variant_keeps_leading_term(self, params):
        x, w = 1.0, params.omega_c_tau_s
        expected = 2.0 / math.pi * params.gamma0 * (math.pi / 2 * w * x + integrated_sine_term(x, w) - math.pi / 2 * x)
        assert kernel_k_variant(x, params, KernelVariant.SHIFTED_SI).re == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("variant", [KernelVariant.SHIFTED_SI, KernelVariant.STANDARD_SI])
    def test_variants_differ_from_normative(self, params, variant):
        assert abs(kernel_k_variant(1.0, params, variant).re - kernel_k(1.0, params).re) > 1e-4

    def test_variant_accepts_string(self, params):
        assert kernel_k_variant(0.5, params, "standard_si") == kernel_k_variant(
            0.5, params, KernelVariant.STANDARD_SI)


class TestSmallTimeForms:
    def test_quadratic_zero(self, params):
        assert kernel_k_quadratic(0.0, params) == 0.0

    def test_quadratic_value(self):
        p = NoiseParams.from_coupling(2.548e-3, 100.0)
        assert kernel_k_quadratic(1.0, p) == pytest.approx(2.433e-3, rel=1e-3)

    def test_quadratic_linear_in_coupling(self):
        small = NoiseParams.from_coupling(1e-3, 100.0)
        large = NoiseParams.from_coupling(2e-3, 100.0)
        assert kernel_k_quadratic(2.0, large) == pytest.approx(2.0 * kernel_k_quadratic(2.0, small), rel=1e-14)

    def test_gaussian_peak(self, params):
        assert gaussian_rho11(0.0, params) == 1.0

    def test_gaussian_decreasing(self):
        p = NoiseParams.from_coupling(7e-4, 100.0)
        values = [gaussian_rho11(x, p) for x in np.linspace(0.0, 3.0, 61)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_gaussian_close_to_linear(self):
        p = NoiseParams.from_coupling(7e-4, 100.0)
        for x in np.linspace(0.0, 3.0, 61):
            z = 2.0 * kernel_k_quadratic(x, p)
            assert abs(gaussian_rho11(x, p) - (1.0 - z)) <= 0.5 * z * z + 1e-15
