"""
Noisy evolution superoperator V(t) on two-qubit density matrices and its population restriction
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from src.exceptions import ConsistencyError, DomainError
from src.kernel.decoherence_kernel import KernelValue
from src.multiplet.multiplet_basis import (
    InitialState,
    MultipletBasis,
    TransitionTensor,
    basis_change,
    transition_tensor,
)

logger = logging.getLogger(__name__)

STATE_TOL = 1e-12
IMAGINARY_TOL = 1e-12
POSITIVITY_TOL = 1e-9
ALPHA_MAX = 0.5


class BasisTag(str, Enum):
    MULTIPLET = "multiplet"
    COMPUTATIONAL = "computational"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Unit-trace Hermitian 4x4 operator in a declared basis

    Positivity is not required; the first-order map may push small
    eigenvalues below zero, which positivity_margin exposes.
    """

    rho: np.ndarray
    basis: BasisTag = BasisTag.MULTIPLET

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise DomainError(f"Density matrix must be 4x4, got {rho.shape}")
        hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
        if hermiticity > STATE_TOL:
            raise DomainError(f"Density matrix is not Hermitian (max |rho - rho^dagger| = {hermiticity:.3e})")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > STATE_TOL:
            raise DomainError(f"Density matrix trace must be 1, got {trace:.15g}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "basis", BasisTag(self.basis))

    @classmethod
    def pure(cls, index: int, basis: BasisTag = BasisTag.MULTIPLET) -> "DensityMatrix":
        rho = np.zeros((4, 4), dtype=complex)
        rho[index, index] = 1.0
        return cls(rho, basis)

    def positivity_margin(self) -> float:
        """Smallest eigenvalue; negative values mean the state left the positive cone"""
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()


@dataclass(frozen=True, eq=False)
class EvolutionSuperoperator:
    """
    Dense 16x16 map V_{(ab),(cd)} on multiplet density components

    Rows carry the output pair (a, b), columns the input pair (c, d), both in
    row-major vec order so that vec(rho(t)) = v @ vec(rho(0)).
    """

    v: np.ndarray
    alpha: float
    basis_name: str = "custom"

    def __post_init__(self):
        v = np.array(self.v, dtype=complex)
        if v.shape != (16, 16):
            raise DomainError(f"Superoperator must be 16x16, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    def element(self, a: int, b: int, c: int, d: int) -> complex:
        return complex(self.v[4 * a + b, 4 * c + d])

    def apply(self, state: DensityMatrix) -> DensityMatrix:
        """Evolve a multiplet-basis density matrix; warns when the result is not positive"""
        if state.basis is not BasisTag.MULTIPLET:
            raise DomainError("The superoperator acts on multiplet-basis density matrices")
        out = DensityMatrix((self.v @ state.rho.reshape(16)).reshape(4, 4), BasisTag.MULTIPLET)
        margin = out.positivity_margin()
        if margin < -POSITIVITY_TOL:
            logger.warning(f"Evolved state has a negative eigenvalue {margin:.3e} at alpha={self.alpha:.6g}")
        return out

    def trace_defect(self) -> float:
        """max over (c, d) of |sum_a V_{(aa),(cd)} - delta_cd|"""
        diagonal_rows = self.v[[5 * a for a in range(4)], :]
        return float(np.max(np.abs(diagonal_rows.sum(axis=0) - np.eye(4).reshape(16))))


@dataclass(frozen=True, eq=False)
class PopulationMatrix:
    """Diagonal-to-diagonal restriction P_ac = V_{(aa),(cc)} of the superoperator"""

    p: np.ndarray
    alpha: float

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (4, 4):
            raise DomainError(f"Population matrix must be 4x4, got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def column_sums(self) -> np.ndarray:
        return self.p.sum(axis=0)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= ALPHA_MAX:
        raise DomainError(f"alpha = Re k must lie in [0, {ALPHA_MAX}], got {alpha}")
    return alpha


def build_superoperator(m: TransitionTensor, energies: Sequence[float], k: KernelValue,
                        t: float = 0.0, basis_name: str = "custom") -> EvolutionSuperoperator:
    """
    Assemble the first-order time-convolutionless evolution superoperator

        V_abcd = exp[-i t (E_a - E_b)] {d_ac d_bd - [d_bd L_ac - M_acdb] k - [d_ac L_db - M_acdb] k*}

    with L_ac = sum_a' M_{a a' a' c}.

    Args:
        m: Transition tensor of the multiplet basis
        energies: E_a of the same basis (units of 1/tau_s)
        k: Kernel value at the gate time
        t: Dimensionless time entering the phase factors
        basis_name: Label carried into the result

    Returns:
        EvolutionSuperoperator with alpha = Re k
    """
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (4,):
        raise DomainError(f"Expected 4 energies, got shape {energies.shape}")

    # Dissipative brackets from the contracted and exchanged tensor
    identity = np.eye(4)
    contracted = m.contracted()
    exchange = np.einsum("acdb->abcd", m.m)
    left = np.einsum("bd,ac->abcd", identity, contracted) - exchange
    right = np.einsum("ac,db->abcd", identity, contracted) - exchange
    # Combine with k and its conjugate
    kc = k.as_complex()
    bracket = np.einsum("ac,bd->abcd", identity, identity) - left * kc - right * kc.conjugate()

    # Apply the energy phases and flatten to 16x16
    phase = np.exp(-1j * t * (energies[:, None] - energies[None, :]))
    v = (phase[:, :, None, None] * bracket).reshape(16, 16)
    return EvolutionSuperoperator(v, alpha=k.re, basis_name=basis_name)


def superoperator_for_basis(basis: MultipletBasis, k: KernelValue, t: float = 0.0) -> EvolutionSuperoperator:
    return build_superoperator(transition_tensor(basis), basis.energies, k, t, basis_name=basis.name)


def population_matrix(v: EvolutionSuperoperator) -> PopulationMatrix:
    """
    Restrict the superoperator to populations

    Raises:
        ConsistencyError: A diagonal-to-diagonal element has an imaginary part above 1e-12
    """
    diagonal = [5 * a for a in range(4)]
    block = v.v[np.ix_(diagonal, diagonal)]
    imaginary = float(np.max(np.abs(block.imag)))
    if imaginary > IMAGINARY_TOL:
        logger.error(f"Population block of basis '{v.basis_name}' has imaginary part {imaginary:.3e}")
        raise ConsistencyError(f"Population transfer must be real, found imaginary part {imaginary:.3e}")
    return PopulationMatrix(block.real, alpha=v.alpha)


def cnot_population_closed_form(alpha: float) -> PopulationMatrix:
    """Population matrix for the CNOT multiplet basis exactly as tabulated in closed form"""
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    a, h = alpha, 0.5 * alpha
    p = np.array([
        [1 - 2 * a, a, h, h],
        [a, 1 - 2 * a, h, h],
        [h, h, 1 - 3 * h, h],
        [h, h, h, 1 - 3 * h],
    ])
    return PopulationMatrix(p, alpha=alpha)


def evolve_populations(initial: InitialState, alpha: float, basis: MultipletBasis) -> np.ndarray:
    """
    Computational-basis outcome probabilities after one noisy gate

    Args:
        initial: Multiplet state the gate starts from
        alpha: Re k at the gate time, in [0, 1/2]
        basis: Multiplet basis of the gate

    Returns:
        Probabilities over |00>, |01>, |10>, |11>
    """
    alpha = _check_alpha(alpha)
    index = InitialState(initial).index
    populations = population_matrix(superoperator_for_basis(basis, KernelValue(alpha, 0.0))).p[:, index]
    rho_computational = basis_change(basis).to_computational(np.diag(populations))
    return rho_computational.diagonal().real.copy()


def evolve_density_matrix(state: DensityMatrix, basis: MultipletBasis, k: KernelValue,
                          t: float = 0.0) -> DensityMatrix:
    """
    Evolve a full density matrix, coherences included, and return it in the computational basis

    A computational-basis input is first rotated into the multiplet basis.
    """
    change = basis_change(basis)
    if state.basis is BasisTag.COMPUTATIONAL:
        state = DensityMatrix(change.to_multiplet(state.rho), BasisTag.MULTIPLET)
    evolved = superoperator_for_basis(basis, k, t).apply(state)
    return DensityMatrix(change.to_computational(evolved.rho), BasisTag.COMPUTATIONAL)


def outcome_probabilities(state: DensityMatrix, basis: Optional[MultipletBasis] = None) -> np.ndarray:
    """Diagonal of the computational-basis density matrix"""
    if state.basis is BasisTag.MULTIPLET:
        if basis is None:
            raise DomainError("A multiplet-basis state needs its basis to produce outcome probabilities")
        return np.diag(basis_change(basis).to_computational(state.rho)).real.copy()
    return state.populations()
