"""
Two-qubit multiplet bases, the spin transition tensor and operator basis changes
"""

import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from src.exceptions import BasisValidationError, ConsistencyError, DomainError

logger = logging.getLogger(__name__)

# Computational ordering used everywhere: |00>, |01>, |10>, |11>
COMPUTATIONAL_LABELS = ("00", "01", "10", "11")

NORMALIZATION_TOL = 1e-12
REAL_TENSOR_TOL = 1e-15

PAULI_LABELS = ("I", "X", "Y", "Z")
PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_product(i: int, j: int) -> np.ndarray:
    """sigma_i (x) sigma_j with sigma_0 the identity"""
    return np.kron(PAULI[i], PAULI[j])


def spin_operators() -> Tuple[np.ndarray, ...]:
    """The six spin-1/2 operators S_i^j = sigma^j / 2 acting on qubit i of the pair"""
    half = [0.5 * PAULI[j] for j in (1, 2, 3)]
    first = tuple(np.kron(s, PAULI[0]) for s in half)
    second = tuple(np.kron(PAULI[0], s) for s in half)
    return first + second


class Gate(str, Enum):
    """Gates with a bundled multiplet basis"""

    IDENTITY = "identity"
    CNOT = "cnot"


class InitialState(str, Enum):
    """Multiplet state a gate run starts from"""

    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    M4 = "m4"

    @property
    def index(self) -> int:
        return int(self.value[1]) - 1


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Normalized state over the computational basis"""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (4,):
            raise BasisValidationError(f"A two-qubit state needs 4 amplitudes, got {amplitudes.shape[0]}")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise BasisValidationError(f"State is not normalized: <psi|psi> = {norm:.15g}")
        object.__setattr__(self, "amplitudes", _readonly(amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class MultipletBasis:
    """
    Four orthonormal two-qubit states in which a gate acts trivially on populations

    energies holds E_a (hbar = 1, units of 1/tau_s) for the phase factors of
    the evolution superoperator; they default to zero.
    """

    states: Tuple[TwoQubitState, ...]
    energies: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    name: str = "custom"
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(s if isinstance(s, TwoQubitState) else TwoQubitState(s) for s in self.states)
        if len(states) != 4:
            raise BasisValidationError(f"A multiplet basis needs 4 states, got {len(states)}")
        energies = tuple(float(e) for e in self.energies)
        if len(energies) != 4 or not all(math.isfinite(e) for e in energies):
            raise BasisValidationError(f"A multiplet basis needs 4 finite energies, got {self.energies}")

        matrix = np.column_stack([s.amplitudes for s in states])
        overlap = matrix.conj().T @ matrix
        deviation = float(np.max(np.abs(overlap - np.eye(4))))
        if deviation > NORMALIZATION_TOL:
            logger.error(f"Basis '{self.name}' is not orthonormal (max overlap deviation {deviation:.3e})")
            raise BasisValidationError(f"Basis '{self.name}' is not orthonormal: max |<a|b> - delta_ab| = {deviation:.3e}")

        object.__setattr__(self, "states", states)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "_matrix", _readonly(matrix))

    @property
    def matrix(self) -> np.ndarray:
        """Unitary whose columns are the basis states in computational amplitudes"""
        return self._matrix

    def with_energies(self, energies: Sequence[float]) -> "MultipletBasis":
        return replace(self, energies=tuple(energies))


def identity_basis() -> MultipletBasis:
    """{|00>, (|01> + |10>)/sqrt2, |11>, (|01> - |10>)/sqrt2}"""
    r = 1.0 / math.sqrt(2.0)
    return MultipletBasis(
        states=(
            TwoQubitState([1, 0, 0, 0]),
            TwoQubitState([0, r, r, 0]),
            TwoQubitState([0, 0, 0, 1]),
            TwoQubitState([0, r, -r, 0]),
        ),
        name=Gate.IDENTITY.value,
    )


def cnot_basis() -> MultipletBasis:
    """{|00>, |01>, (|10> + |11>)/sqrt2, (|10> - |11>)/sqrt2}"""
    r = 1.0 / math.sqrt(2.0)
    return MultipletBasis(
        states=(
            TwoQubitState([1, 0, 0, 0]),
            TwoQubitState([0, 1, 0, 0]),
            TwoQubitState([0, 0, r, r]),
            TwoQubitState([0, 0, r, -r]),
        ),
        name=Gate.CNOT.value,
    )


def basis_for_gate(gate: Gate) -> MultipletBasis:
    gate = Gate(gate)
    if gate is Gate.IDENTITY:
        return identity_basis()
    return cnot_basis()


@dataclass(frozen=True, eq=False)
class TransitionTensor:
    """
    M_abcd = sum over qubits and axes of <a|S|b><c|S|d>

    Stored complex so bases with complex amplitudes are covered; real() gives
    the float tensor of the identity and CNOT bases.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        if m.shape != (4, 4, 4, 4):
            raise DomainError(f"Transition tensor must have shape (4, 4, 4, 4), got {m.shape}")
        object.__setattr__(self, "m", _readonly(m))

    def real(self, tol: float = REAL_TENSOR_TOL) -> np.ndarray:
        """
        M as a float array, for bases with real amplitudes

        Raises:
            ConsistencyError: Some entry has an imaginary part above tol
        """
        imaginary = float(np.max(np.abs(self.m.imag)))
        if imaginary > tol:
            logger.error(f"Transition tensor is complex: max |Im M| = {imaginary:.3g}")
            raise ConsistencyError(f"Transition tensor has imaginary parts up to {imaginary:.3g} (tolerance {tol:g})")
        return self.m.real.copy()

    def contracted(self) -> np.ndarray:
        """L_ac = sum_a' M_{a a' a' c}; equals (3/2) delta_ac for any orthonormal basis"""
        return np.einsum("abbc->ac", self.m)

    def population_block(self) -> np.ndarray:
        """M_{a c c a} as a 4x4 array indexed (a, c)"""
        return np.einsum("acca->ac", self.m)


def transition_tensor(basis: MultipletBasis) -> TransitionTensor:
    """
    Build M_abcd for a multiplet basis from the matrix elements of the spin operators

    Args:
        basis: Orthonormal multiplet basis

    Returns:
        TransitionTensor with the 1/4 of S = sigma/2 already applied
    """
    u = basis.matrix
    m = np.zeros((4, 4, 4, 4), dtype=complex)
    for s in spin_operators():
        elements = u.conj().T @ s @ u
        m += np.einsum("ab,cd->abcd", elements, elements)
    logger.debug(f"Transition tensor for basis '{basis.name}' built")
    return TransitionTensor(m)


def transition_tensor_explicit(basis: MultipletBasis) -> TransitionTensor:
    """Same tensor assembled entry by entry from <a|S|b><c|S|d> inner products"""
    states = [s.amplitudes for s in basis.states]
    m = np.zeros((4, 4, 4, 4), dtype=complex)
    for s in spin_operators():
        for a in range(4):
            for b in range(4):
                ab = np.vdot(states[a], s @ states[b])
                for c in range(4):
                    for d in range(4):
                        m[a, b, c, d] += ab * np.vdot(states[c], s @ states[d])
    return TransitionTensor(m)


@dataclass(frozen=True, eq=False)
class BasisChange:
    """
    Overlap C_{alpha beta | a b} = tr(e^c_{alpha beta}^dagger e^m_{ab}) between operator bases

    Rows follow the computational pair (alpha, beta), columns the multiplet
    pair (a, b), both in row-major vec order.
    """

    c: np.ndarray

    def to_computational(self, rho_multiplet: np.ndarray) -> np.ndarray:
        vec = np.asarray(rho_multiplet, dtype=complex).reshape(16)
        return (self.c @ vec).reshape(4, 4)

    def to_multiplet(self, rho_computational: np.ndarray) -> np.ndarray:
        vec = np.asarray(rho_computational, dtype=complex).reshape(16)
        return (self.c.conj().T @ vec).reshape(4, 4)

    def unitarity_defect(self) -> float:
        return float(np.max(np.abs(self.c @ self.c.conj().T - np.eye(16))))


def basis_change(basis: MultipletBasis) -> BasisChange:
    """Operator-basis change from multiplet to computational components"""
    u = basis.matrix
    # tr(|beta><alpha|a><b|) = U[alpha, a] * conj(U[beta, b])
    return BasisChange(_readonly(np.kron(u, u.conj())))
