"""
Non-Markovian decoherence kernel k(t) and the ohmic bath correlation functions

All internal times are dimensionless, x = t / tau_s. Absolute times are
converted once, at the API boundary (NoiseParams.to_x / kernel_k_at_time).
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from src.exceptions import DomainError
from src.specfun.quadrature import QuadratureConfig, integrate_adaptive
from src.specfun.special_functions import HALF_PI, si_shifted, si_standard

logger = logging.getLogger(__name__)

# Below this value of omega_c * t the correlations are evaluated by series
SERIES_THRESHOLD = 1e-4

ORACLE_OUTER = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-9)
ORACLE_INNER = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-12)
ORACLE_FREQUENCY = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-11)


class CorrelationPrefactor(str, Enum):
    """Prefactor of the dissipative correlation in front of sin(omega_c t)/t"""

    SELF_CONSISTENT = "self_consistent"  # 2 Gamma0 / pi, reproduces Re k = (2/pi) Gamma0 I1
    PRINTED = "printed"                  # pi Gamma0 / 2, as typeset next to the closed form


class KernelVariant(str, Enum):
    """Closed-form presentations of k(t)"""

    NORMATIVE = "normative"
    SHIFTED_SI = "shifted_si"
    STANDARD_SI = "standard_si"


@dataclass(frozen=True)
class NoiseParams:
    """
    Dimensionless bath and coupling parameters that fully determine k(t)

    gamma0 and delta0 absorb the coupling, the ohmic strength and the
    temperature; they are not represented separately.
    """

    gamma0: float
    delta0: float
    omega_c_tau_s: float
    tau_s: float = 1.0

    def __post_init__(self):
        for name in ("gamma0", "delta0", "omega_c_tau_s", "tau_s"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"NoiseParams.{name} must be finite, got {value}")
        if self.gamma0 < 0 or self.delta0 < 0:
            raise DomainError(f"gamma0 and delta0 must be non-negative, got {self.gamma0}, {self.delta0}")
        if self.omega_c_tau_s <= 0 or self.tau_s <= 0:
            raise DomainError(f"omega_c_tau_s and tau_s must be positive, got {self.omega_c_tau_s}, {self.tau_s}")

    @classmethod
    def from_coupling(cls, gamma0_omega_tau: float, omega_c_tau_s: float,
                      delta0: float = 0.0, tau_s: float = 1.0) -> "NoiseParams":
        """Build parameters from the product Gamma0 * omega_c * tau_s used to label curves"""
        if omega_c_tau_s <= 0:
            raise DomainError(f"omega_c_tau_s must be positive, got {omega_c_tau_s}")
        return cls(gamma0=gamma0_omega_tau / omega_c_tau_s, delta0=delta0,
                   omega_c_tau_s=omega_c_tau_s, tau_s=tau_s)

    @property
    def coupling(self) -> float:
        """Gamma0 * omega_c * tau_s"""
        return self.gamma0 * self.omega_c_tau_s

    def to_x(self, t_seconds: float) -> float:
        """Convert an absolute time to x = t / tau_s"""
        return t_seconds / self.tau_s


@dataclass(frozen=True)
class KernelValue:
    """Re k (decoherence function) and Im k (coherent shift)"""

    re: float
    im: float

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


def _check_time(x: float, strict: bool = False) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Time must be finite, got {x}")
    if strict and x <= 0.0:
        raise DomainError(f"Bath correlation needs t/tau_s > 0, got {x}; use bath_correlation_at_origin")
    if x < 0.0:
        raise DomainError(f"Time must be non-negative, got {x}")
    return x


def _dissipative_scale(p: NoiseParams, prefactor: CorrelationPrefactor) -> float:
    if CorrelationPrefactor(prefactor) is CorrelationPrefactor.PRINTED:
        return HALF_PI * p.gamma0
    return p.gamma0 / HALF_PI


def bath_correlation(t_over_tau_s: float, p: NoiseParams,
                     prefactor: CorrelationPrefactor = CorrelationPrefactor.SELF_CONSISTENT) -> Tuple[float, float]:
    """
    Dimensionless bath correlation (tau_s^2 Gamma, tau_s^2 Delta) at x = t / tau_s

        tau_s^2 Gamma = (2 Gamma0 / pi) sin(w x) / x
        tau_s^2 Delta = -Delta0 [sin(w x) / (w x^2) - cos(w x) / x]

    with w = omega_c tau_s. Both are evaluated by series when w x < 1e-4.

    Args:
        t_over_tau_s: Strictly positive dimensionless time
        p: Noise parameters
        prefactor: Dissipative prefactor convention

    Returns:
        Tuple of the dissipative and the shift correlation
    """
    x = _check_time(t_over_tau_s, strict=True)
    w = p.omega_c_tau_s
    y = w * x
    scale = _dissipative_scale(p, prefactor)
    if y < SERIES_THRESHOLD:
        y2 = y * y
        gamma = scale * w * (1.0 - y2 / 6.0)
        # sin(y)/y - cos(y) = y^2/3 - y^4/30 + ...
        delta = -p.delta0 * w * y * (1.0 / 3.0 - y2 / 30.0)
    else:
        gamma = scale * math.sin(y) / x
        delta = -p.delta0 * (math.sin(y) / (w * x * x) - math.cos(y) / x)
    return gamma, delta


def bath_correlation_at_origin(p: NoiseParams,
                               prefactor: CorrelationPrefactor = CorrelationPrefactor.SELF_CONSISTENT) -> Tuple[float, float]:
    """Limit x -> 0+ of bath_correlation: ((2/pi) Gamma0 w, 0)"""
    return _dissipative_scale(p, prefactor) * p.omega_c_tau_s, 0.0


def _correlation(tau: float, p: NoiseParams) -> Tuple[float, float]:
    if tau == 0.0:
        return bath_correlation_at_origin(p)
    return bath_correlation(tau, p)


def bath_correlation_frequency_integral(t_over_tau_s: float, p: NoiseParams,
                                        cfg: QuadratureConfig = ORACLE_FREQUENCY) -> Tuple[float, float]:
    """
    Bath correlation straight from the high-temperature ohmic frequency integral

        tau_s^2 Gamma = (2 Gamma0 / pi) integral_0^w cos(nu x) d nu
        tau_s^2 Delta = -(Delta0 / w) integral_0^w nu sin(nu x) d nu
    """
    x = _check_time(t_over_tau_s, strict=True)
    w = p.omega_c_tau_s
    gamma = p.gamma0 / HALF_PI * integrate_adaptive(lambda nu: math.cos(nu * x), 0.0, w, cfg)
    delta = -p.delta0 / w * integrate_adaptive(lambda nu: nu * math.sin(nu * x), 0.0, w, cfg)
    return gamma, delta


def sine_integral_term(t_over_tau_s: float, omega_c_tau_s: float) -> float:
    """I2(x) = integral_0^x sin(w u)/u du = Si_standard(w x)"""
    return si_standard(omega_c_tau_s * t_over_tau_s)


def integrated_sine_term(t_over_tau_s: float, omega_c_tau_s: float) -> float:
    """
    I1(x) = integral_0^x Si_standard(w u) du = x Si(w x) + (cos(w x) - 1) / w

    cos(y) - 1 is written as -2 sin^2(y/2) so small arguments keep their
    relative accuracy.
    """
    x, w = t_over_tau_s, omega_c_tau_s
    y = w * x
    half_sine = math.sin(0.5 * y)
    return x * si_standard(y) - 2.0 * half_sine * half_sine / w


def kernel_k(t_over_tau_s: float, p: NoiseParams) -> KernelValue:
    """
    Decoherence kernel k(x) from its closed form

        Re k = (2/pi) Gamma0 I1(x)
        Im k = Delta0 [x - I2(x) / w]

    Both terms use the standard sine integral.

    Args:
        t_over_tau_s: Non-negative dimensionless time
        p: Noise parameters

    Returns:
        KernelValue; exactly (0, 0) at x = 0
    """
    x = _check_time(t_over_tau_s)
    if x == 0.0:
        return KernelValue(0.0, 0.0)
    w = p.omega_c_tau_s
    re = p.gamma0 / HALF_PI * integrated_sine_term(x, w)
    im = p.delta0 * (x - sine_integral_term(x, w) / w)
    return KernelValue(re, im)


def kernel_k_at_time(t_seconds: float, p: NoiseParams) -> KernelValue:
    """kernel_k for an absolute time in seconds"""
    return kernel_k(p.to_x(t_seconds), p)


def kernel_k_variant(t_over_tau_s: float, p: NoiseParams, variant: KernelVariant) -> KernelValue:
    """
    Evaluate one of the closed-form presentations of k(x)

    SHIFTED_SI keeps the leading (pi/2) w x term and integrates the
    shifted sine integral; STANDARD_SI keeps the leading term but
    integrates the standard one. NORMATIVE is kernel_k.
    """
    variant = KernelVariant(variant)
    if variant is KernelVariant.NORMATIVE:
        return kernel_k(t_over_tau_s, p)

    x = _check_time(t_over_tau_s)
    w = p.omega_c_tau_s
    i1_standard = integrated_sine_term(x, w) if x > 0 else 0.0
    if variant is KernelVariant.SHIFTED_SI:
        integral = i1_standard - HALF_PI * x
        si_value = si_shifted(w * x)
    else:
        integral = i1_standard
        si_value = si_standard(w * x)
    re = p.gamma0 / HALF_PI * (HALF_PI * w * x + integral)
    im = p.delta0 * (x - (HALF_PI * w + si_value) / w)
    return KernelValue(re, im)


def kernel_k_double_integral(t_over_tau_s: float, p: NoiseParams,
                             outer: QuadratureConfig = ORACLE_OUTER,
                             inner: QuadratureConfig = ORACLE_INNER) -> KernelValue:
    """
    Normative kernel as the nested time integral of the bath correlation

    Re k = integral_0^x ds integral_0^s dtau tau_s^2 Gamma(tau). The imaginary
    part is returned as minus the same double integral of tau_s^2 Delta, the
    sign under which it matches the closed form of kernel_k.
    """
    x = _check_time(t_over_tau_s)
    if x == 0.0:
        return KernelValue(0.0, 0.0)

    def inner_gamma(s: float) -> float:
        return integrate_adaptive(lambda tau: _correlation(tau, p)[0], 0.0, s, inner)

    def inner_delta(s: float) -> float:
        return integrate_adaptive(lambda tau: _correlation(tau, p)[1], 0.0, s, inner)

    re = integrate_adaptive(inner_gamma, 0.0, x, outer) if p.gamma0 > 0 else 0.0
    im = -integrate_adaptive(inner_delta, 0.0, x, outer) if p.delta0 > 0 else 0.0
    logger.debug(f"Double-integral kernel at x={x}: re={re:.12g}, im={im:.12g}")
    return KernelValue(re, im)


def kernel_k_quadratic(t_over_tau_s: float, p: NoiseParams) -> float:
    """Quadratic small-time form of Re k: (2/pi) Gamma0 w [x + x^2/2]"""
    x = _check_time(t_over_tau_s)
    return p.coupling / HALF_PI * (x + 0.5 * x * x)


def gaussian_rho11(t_over_tau_s: float, p: NoiseParams) -> float:
    """
    Gaussian population of the first multiplet state

    exp[a] exp[-a (x + 1)^2] with a = (2/pi) Gamma0 w, evaluated as a single
    exponential so the peak at x = 0 is exactly one.
    """
    x = _check_time(t_over_tau_s)
    a = p.coupling / HALF_PI
    return math.exp(a * (1.0 - (x + 1.0) ** 2))
