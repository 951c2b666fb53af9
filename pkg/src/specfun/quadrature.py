"""
Adaptive Simpson quadrature used as the numerical oracle for every closed form
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

from src.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and work limits for integrate_adaptive"""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 10_000
    initial_panels: int = 8

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(f"Tolerances must be positive, got abs_tol={self.abs_tol}, rel_tol={self.rel_tol}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be at least 1, got {self.max_subdivisions}")
        if self.initial_panels < 1:
            raise DomainError(f"initial_panels must be at least 1, got {self.initial_panels}")


DEFAULT_QUADRATURE = QuadratureConfig()

# (left, mid, right, f_left, f_mid, f_right, simpson_estimate)
_Panel = Tuple[float, float, float, float, float, float, float]


def _evaluate(f: Callable[[float], float], x: float) -> float:
    value = float(f(x))
    if not math.isfinite(value):
        raise DomainError(f"Integrand is not finite at x={x!r}")
    return value


def _simpson(a: float, b: float, fa: float, fm: float, fb: float) -> float:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def integrate_adaptive(f: Callable[[float], float], a: float, b: float,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Integrate f over [a, b] by adaptive Simpson bisection

    The interval is first cut into cfg.initial_panels panels; each panel is
    bisected until the Richardson error estimate of the two halves falls
    below its share of the global tolerance
    max(abs_tol, rel_tol * |estimate|). Panels are processed depth-first
    in a fixed order, so the result is deterministic for a given config.

    Args:
        f: Integrand, finite on [a, b]
        a: Lower limit
        b: Upper limit (must satisfy a <= b)
        cfg: Tolerances and subdivision budget

    Returns:
        The integral estimate

    Raises:
        DomainError: Non-finite limits, a > b, or a non-finite integrand value
        ConvergenceError: The subdivision budget ran out; carries the best
            estimate and its error bound
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"Integration limits must be finite, got [{a}, {b}]")
    if a > b:
        raise DomainError(f"Integration limits must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0

    # Seed the stack with the initial panels, leftmost on top
    span = b - a
    n = cfg.initial_panels
    nodes = [a + span * i / (2 * n) for i in range(2 * n)] + [b]
    values = [_evaluate(f, x) for x in nodes]

    stack: List[_Panel] = []
    coarse = 0.0
    for i in range(n - 1, -1, -1):
        left, mid, right = nodes[2 * i], nodes[2 * i + 1], nodes[2 * i + 2]
        fl, fm, fr = values[2 * i], values[2 * i + 1], values[2 * i + 2]
        whole = _simpson(left, right, fl, fm, fr)
        coarse += whole
        stack.append((left, mid, right, fl, fm, fr, whole))

    # Global tolerance from the coarse estimate
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(coarse))
    total = 0.0
    error = 0.0
    subdivisions = 0

    while stack:
        left, mid, right, fl, fm, fr, whole = stack.pop()
        # Split the panel in two
        lm = 0.5 * (left + mid)
        rm = 0.5 * (mid + right)
        flm = _evaluate(f, lm)
        frm = _evaluate(f, rm)
        s_left = _simpson(left, mid, fl, flm, fm)
        s_right = _simpson(mid, right, fm, frm, fr)
        delta = s_left + s_right - whole
        local_tol = tol * (right - left) / span

        # No representable midpoint left: accept what we have.
        exhausted = not (left < lm < mid < rm < right)
        if abs(delta) <= 15.0 * local_tol or exhausted:
            total += s_left + s_right + delta / 15.0
            error += abs(delta) / 15.0
            continue

        # Refine
        subdivisions += 1
        if subdivisions > cfg.max_subdivisions:
            pending = sum(panel[6] for panel in stack)
            estimate = total + s_left + s_right + pending
            bound = error + abs(delta)
            logger.error(f"Adaptive quadrature on [{a}, {b}] exceeded {cfg.max_subdivisions} subdivisions")
            raise ConvergenceError(
                f"Tolerance {tol:.3e} not reached within {cfg.max_subdivisions} subdivisions "
                f"(estimate {estimate:.12g}, error bound {bound:.3e})",
                estimate=estimate,
                error_bound=bound,
            )

        stack.append((mid, rm, right, fm, frm, fr, s_right))
        stack.append((left, lm, mid, fl, flm, fm, s_left))

    logger.debug(f"Quadrature on [{a}, {b}]: {total:.15g} (+/- {error:.2e}, {subdivisions} subdivisions)")
    return total
