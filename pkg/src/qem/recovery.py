"""
Quasiprobability recovery operator, its Pauli-product expansion and the mitigation cost
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from src.exceptions import DomainError, InversionError
from src.evolution.superoperator import PopulationMatrix
from src.multiplet.multiplet_basis import PAULI_LABELS, pauli_product

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e8
DENOMINATOR_TOL = 1e-12


class RecoverySource(str, Enum):
    NUMERIC_INVERSE = "numeric-inverse"
    PUBLISHED_CLOSED_FORM = "published-closed-form"


@dataclass(frozen=True, eq=False)
class RecoveryOperator:
    """Recovery map on multiplet populations, r @ P(alpha) = ideal"""

    r: np.ndarray
    alpha: float
    source: RecoverySource

    def residual(self, p: PopulationMatrix, ideal: Optional[np.ndarray] = None) -> float:
        """Frobenius norm of r @ p - ideal"""
        target = np.eye(4) if ideal is None else np.asarray(ideal, dtype=float)
        return float(np.linalg.norm(self.r @ p.p - target))


@dataclass(frozen=True, eq=False)
class DiracExpansion:
    """
    Coefficients mu_ij of an operator over the Pauli products sigma_i (x) sigma_j

    coefficients[i, j] multiplies sigma_i (x) sigma_j; the basis is normalized
    to tr[E^dagger E] = 4. Coefficients are complex in general and real for
    the real symmetric recovery operators used here.
    """

    coefficients: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return sum(self.coefficients[i, j] * pauli_product(i, j) for i in range(4) for j in range(4))

    def as_dict(self, tol: float = 0.0) -> Dict[str, complex]:
        """Label -> coefficient, e.g. 'ZX' for sigma_3 (x) sigma_1; entries with |mu| <= tol are dropped"""
        return {
            PAULI_LABELS[i] + PAULI_LABELS[j]: complex(self.coefficients[i, j])
            for i in range(4) for j in range(4)
            if abs(self.coefficients[i, j]) > tol
        }


@dataclass(frozen=True, eq=False)
class CostResult:
    """
    Mitigation overhead c = sum |mu|, with the quasiprobabilities and signs

    quasiprobabilities (floats) and signs (ints in {-1, 0, 1}) are 4x4 arrays
    holding the 16 per-term values, indexed like DiracExpansion.coefficients.
    """

    cost: float
    quasiprobabilities: np.ndarray
    signs: np.ndarray


def closed_form_denominator(alpha: float) -> float:
    """Common denominator 1 - 5.5a + 8.3125a^2 - 1.5a^3 - 2.8125a^4 of the closed-form entries"""
    return np.polyval([-2.8125, -1.5, 8.3125, -5.5, 1.0], alpha)


def _closed_form_numerators(alpha: float) -> Dict[str, float]:
    return {
        "B": np.polyval([-1.875, 2.125, -0.5, 0.0], alpha),
        "C": np.polyval([2.8125, -3.5, 1.0], alpha),
        "D": np.polyval([-0.9375, 2.0, -1.0, 0.0], alpha),
        "E": np.polyval([-0.75, 5.5, -4.75, 1.0], alpha),
        "F": np.polyval([-3.0, 2.5, -0.5, 0.0], alpha),
    }


def _checked_denominator(alpha: float) -> float:
    denominator = closed_form_denominator(alpha)
    if abs(denominator) < DENOMINATOR_TOL:
        raise DomainError(f"Closed-form recovery denominator vanishes at alpha={alpha}")
    return float(denominator)


def closed_form_entries(alpha: float) -> Dict[str, float]:
    """The rational entries B, C, D, E, F of the closed-form recovery operator"""
    denominator = _checked_denominator(alpha)
    return {name: float(value) / denominator for name, value in _closed_form_numerators(alpha).items()}


def recovery_numeric(p: PopulationMatrix, ideal: Optional[np.ndarray] = None,
                     max_condition: float = MAX_CONDITION) -> RecoveryOperator:
    """
    Recovery operator ideal @ P^-1 from a numerically inverted population matrix

    Args:
        p: Population matrix at some alpha
        ideal: Ideal population map; identity when omitted
        max_condition: Largest condition number accepted

    Returns:
        RecoveryOperator tagged numeric-inverse

    Raises:
        InversionError: P is singular or its condition number reaches max_condition
    """
    ideal = np.eye(4) if ideal is None else np.asarray(ideal, dtype=float)
    if ideal.shape != (4, 4):
        raise DomainError(f"Ideal map must be 4x4, got {ideal.shape}")

    singular_values = np.linalg.svd(p.p, compute_uv=False)
    smallest = float(singular_values[-1])
    condition = float("inf") if smallest == 0.0 else float(singular_values[0] / smallest)
    if condition >= max_condition:
        logger.error(f"Population matrix at alpha={p.alpha:.6g} is not invertible (condition {condition:.3e})")
        raise InversionError(
            f"Population matrix at alpha={p.alpha:.6g} is singular or ill-conditioned "
            f"(smallest singular value {smallest:.3e}, condition number {condition:.3e})",
            smallest_singular_value=smallest,
            condition_number=condition,
        )

    r = ideal @ np.linalg.inv(p.p)
    logger.debug(f"Numeric recovery at alpha={p.alpha:.6g}: condition {condition:.3e}")
    return RecoveryOperator(r, alpha=p.alpha, source=RecoverySource.NUMERIC_INVERSE)


def recovery_closed_form(alpha: float) -> RecoveryOperator:
    """
    Closed-form recovery operator [[C D B B], [D C B B], [B B E F], [B B F E]]

    Raises:
        DomainError: The common denominator vanishes
    """
    e = closed_form_entries(alpha)
    b, c, d, ee, f = e["B"], e["C"], e["D"], e["E"], e["F"]
    r = np.array([
        [c, d, b, b],
        [d, c, b, b],
        [b, b, ee, f],
        [b, b, f, ee],
    ])
    return RecoveryOperator(r, alpha=alpha, source=RecoverySource.PUBLISHED_CLOSED_FORM)


def dirac_expand(r: RecoveryOperator) -> DiracExpansion:
    """mu_ij = tr[(sigma_i (x) sigma_j)^dagger R] / 4 over all 16 Pauli products"""
    coefficients = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            coefficients[i, j] = np.trace(pauli_product(i, j).conj().T @ r.r) / 4.0
    return DiracExpansion(coefficients)


def printed_expansion_coefficients(alpha: float) -> Dict[str, float]:
    """Expansion coefficients of the closed-form operator as they are typeset, keyed like DiracExpansion.as_dict"""
    e = closed_form_entries(alpha)
    b, c, d, ee, f = e["B"], e["C"], e["D"], e["E"], e["F"]
    return {
        "II": (c + ee) / 2.0,
        "IX": d,
        "XI": (f + 2.0 * b - d) / 2.0,
        "ZI": -(ee - c) / 2.0,
        "XX": b,
        "ZX": -(f - d) / 2.0,
    }


def cost_from_expansion(e: DiracExpansion) -> CostResult:
    """
    Quasiprobability cost c = sum_i |mu_i| with p_i = |mu_i| / c and sgn(mu_i)

    Raises:
        DomainError: Every coefficient is zero
    """
    magnitudes = np.abs(e.coefficients)
    cost = float(magnitudes.sum())
    if cost == 0.0:
        raise DomainError("Cannot derive a cost from an all-zero expansion")
    return CostResult(
        cost=cost,
        quasiprobabilities=magnitudes / cost,
        signs=np.sign(e.coefficients.real).astype(int),
    )


def cost_closed_form(alpha: float) -> float:
    """
    Closed-form cost |C+E|/2 + |C-E|/2 + 2|B| + |D| + |F-D| with the polynomials written out

    Raises:
        DomainError: The common denominator vanishes
    """
    denominator = abs(_checked_denominator(alpha))
    terms = (
        abs(np.polyval([-0.75, 8.3125, -8.25, 2.0], alpha)) / (2.0 * denominator),
        abs(np.polyval([0.75, -2.6875, 1.25, 0.0], alpha)) / (2.0 * denominator),
        2.0 * abs(np.polyval([-1.875, 2.125, -0.5, 0.0], alpha)) / denominator,
        abs(np.polyval([-0.9375, 2.0, -1.0, 0.0], alpha)) / denominator,
        abs(np.polyval([-2.0625, 0.5, 0.5, 0.0], alpha)) / denominator,
    )
    return float(sum(terms))


def cost_numeric(p: PopulationMatrix, ideal: Optional[np.ndarray] = None) -> float:
    """Cost of the numerically inverted population matrix"""
    return cost_from_expansion(dirac_expand(recovery_numeric(p, ideal))).cost
