"""
Sine and cosine integrals in both the standard and the shifted convention
"""

import cmath
import math
import logging
from typing import Tuple

from src.exceptions import ConvergenceError, DomainError
from src.specfun.quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate_adaptive

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
HALF_PI = 0.5 * math.pi

# Power series below this argument, continued fraction above it
SERIES_LIMIT = 4.0

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITERATIONS = 500


def _check_finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} requires a finite argument, got {x}")
    return x


def _si_series(x: float) -> float:
    # Si(x) = sum_n (-1)^n x^(2n+1) / ((2n+1) (2n+1)!)
    power = x
    total = x
    x2 = x * x
    n = 0
    while True:
        power *= -x2 / ((2 * n + 2) * (2 * n + 3))
        term = power / (2 * n + 3)
        total += term
        n += 1
        if abs(term) <= _EPS * abs(total) or n > _MAX_ITERATIONS:
            return total


def _ci_series(x: float) -> float:
    # Ci(x) = gamma + ln x + sum_{n>=1} (-1)^n x^(2n) / (2n (2n)!)
    power = 1.0
    total = 0.0
    x2 = x * x
    n = 0
    while True:
        power *= -x2 / ((2 * n + 1) * (2 * n + 2))
        term = power / (2 * n + 2)
        total += term
        n += 1
        if abs(term) <= _EPS * max(abs(total), 1.0) or n > _MAX_ITERATIONS:
            return EULER_GAMMA + math.log(x) + total


def _auxiliary_tail(x: float) -> Tuple[float, float]:
    """
    Evaluate Si and Ci for x > SERIES_LIMIT from the auxiliary functions

    E1(ix) = -Ci(x) + i (Si(x) - pi/2) is expanded as a continued fraction
    (modified Lentz), which carries the auxiliary functions f and g to full
    double precision where their asymptotic series would stall.
    """
    b = complex(1.0, x)
    c = complex(1.0 / _FPMIN, 0.0)
    d = 1.0 / b
    h = d
    for i in range(2, _MAX_ITERATIONS):
        a = -float((i - 1) * (i - 1))
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
            break
    else:
        raise ConvergenceError(f"Sine/cosine integral continued fraction did not converge at x={x}",
                               estimate=HALF_PI + h.imag, error_bound=abs(delta - 1.0))

    h *= cmath.exp(complex(0.0, -x))
    return HALF_PI + h.imag, -h.real


def si_standard(x: float) -> float:
    """
    Sine integral Si(x) = integral_0^x sin(t)/t dt

    Args:
        x: Finite real argument

    Returns:
        Si(x); odd in x, bounded by Si(pi) ~ 1.8519 in magnitude
    """
    x = _check_finite(x, "si_standard")
    magnitude = abs(x)
    if magnitude <= SERIES_LIMIT:
        value = _si_series(magnitude)
    else:
        value, _ = _auxiliary_tail(magnitude)
    return -value if x < 0 else value


def si_shifted(x: float) -> float:
    """Sine integral in the shifted convention, Si(x) - pi/2, which vanishes at +infinity"""
    return si_standard(x) - HALF_PI


def ci(x: float) -> float:
    """
    Cosine integral Ci(x) = -integral_x^inf cos(t)/t dt

    Args:
        x: Strictly positive argument

    Returns:
        Ci(x)

    Raises:
        DomainError: x <= 0 (logarithmic singularity at the origin)
    """
    x = _check_finite(x, "ci")
    if x <= 0.0:
        raise DomainError(f"ci is defined for x > 0 only, got {x}")
    if x <= SERIES_LIMIT:
        return _ci_series(x)
    _, value = _auxiliary_tail(x)
    return value


def sinc_integrand(t: float) -> float:
    """sin(t)/t with its removable singularity filled in"""
    if t == 0.0:
        return 1.0
    return math.sin(t) / t


def laplace_integrals_closed_form(beta: float, mu: float) -> Tuple[float, float]:
    """
    Closed forms of the two Laplace-type integrals behind the kernel's I2 term

        integral_0^inf x exp(-x mu) / (x^2 + beta^2) dx
            = -Ci(beta mu) cos(beta mu) - Si_shifted(beta mu) sin(beta mu)
        integral_0^inf exp(-x mu) / (x^2 + beta^2) dx
            = [Ci(beta mu) sin(beta mu) - Si_shifted(beta mu) cos(beta mu)] / beta

    Both consume the shifted sine integral.
    """
    if beta <= 0 or mu <= 0:
        raise DomainError(f"beta and mu must be positive, got beta={beta}, mu={mu}")
    y = beta * mu
    c, s = ci(y), si_shifted(y)
    first = -c * math.cos(y) - s * math.sin(y)
    second = (c * math.sin(y) - s * math.cos(y)) / beta
    return first, second


def laplace_integrals_quadrature(beta: float, mu: float,
                                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Tuple[float, float]:
    """Evaluate the same two integrals numerically, truncating where exp(-x mu) < 1e-16"""
    if beta <= 0 or mu <= 0:
        raise DomainError(f"beta and mu must be positive, got beta={beta}, mu={mu}")
    upper = 40.0 / mu
    b2 = beta * beta
    first = integrate_adaptive(lambda x: x * math.exp(-x * mu) / (x * x + b2), 0.0, upper, cfg)
    second = integrate_adaptive(lambda x: math.exp(-x * mu) / (x * x + b2), 0.0, upper, cfg)
    return first, second
