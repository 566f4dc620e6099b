"""
Exact diagonalization of the closed Hermitian system (device + finite reservoirs).

Provides the reference currents the non-Hermitian formulas are compared with.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from src.models.tight_binding import (
    ModelSpec,
    ReservoirSpec,
    build_total,
    total_current_operator,
    total_dimension,
    tunnel_current_operator,
)
from src.numerics.special_functions import fermi_dirac
from src.utils.errors import DimCapError, DomainError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger("oracle")

DIM_CAP = 2000
DELTA_PHI = 1e-4


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Ascending real eigenvalues with orthonormal eigenvectors (columns)."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    doubling: int = 1
    phi: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def weights(self, beta: Optional[float] = None) -> np.ndarray:
        return np.asarray(fermi_dirac(self.eigenvalues, beta), dtype=float)

    def mode_expectation(self, operator: np.ndarray) -> np.ndarray:
        """Per-mode <psi_n|O|psi_n>."""
        return np.einsum('in,ij,jn->n', self.eigenvectors.conj(), operator, self.eigenvectors).real

    def thermal_expectation(self, operator: np.ndarray, beta: Optional[float] = None) -> float:
        return float(np.sum(self.weights(beta) * self.mode_expectation(operator)) / self.doubling)

    def in_eigenbasis(self, operator: np.ndarray) -> np.ndarray:
        """W^dag O W."""
        return self.eigenvectors.conj().T @ operator @ self.eigenvectors


@dataclass(frozen=True, eq=False)
class BogoliubovAmplitudes:
    """
    Current operator between Bogoliubov modes.

    ``a_block`` couples positive-energy modes (d^dag_n d_m), ``b_block`` pairs a
    positive-energy mode with the partner of another (d_n d_m).
    Normal systems have empty pair blocks.
    """
    energies: np.ndarray
    a_block: np.ndarray
    b_block: np.ndarray


def _check_dimension(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], dim_cap: int) -> int:
    dim = total_dimension(system, reservoirs)
    if dim > dim_cap:
        raise DimCapError(f"total dimension {dim} exceeds the cap of {dim_cap}")
    return dim


def diagonalize_total(system: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                      phi: Optional[float] = None, dim_cap: int = DIM_CAP) -> HermitianSpectrum:
    """
    Dense diagonalization of H_tot.

    Args:
        system: Device spec
        reservoirs: Finite reservoirs (N_E sites each)
        phi: Phase, defaults to ``system.phi``
        dim_cap: Largest admissible matrix dimension

    Returns:
        HermitianSpectrum of the total system
    """
    system = system if phi is None else system.with_phi(phi)
    dim = _check_dimension(system, reservoirs, dim_cap)
    logger.debug(f"Diagonalizing H_tot of dim {dim} at phi={system.phi:.6f}")
    values, vectors = linalg.eigh(build_total(system, reservoirs))
    return HermitianSpectrum(eigenvalues=values, eigenvectors=vectors,
                             doubling=system.doubling, phi=system.phi)


def _ground_energy(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], phi: float) -> float:
    values = linalg.eigvalsh(build_total(system.with_phi(phi), reservoirs))
    return float(np.sum(values[values <= 0.0]) / system.doubling)


def _free_energy(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], phi: float, beta: float) -> float:
    values = linalg.eigvalsh(build_total(system.with_phi(phi), reservoirs))
    if system.is_bdg:
        # sum over all modes of ln 2cosh(beta eps / 2); the (eps, -eps) pairs supply the 1/2
        return float(-np.sum(np.logaddexp(0.5 * beta * values, -0.5 * beta * values)) / beta)
    return float(-np.sum(np.logaddexp(0.0, -beta * values)) / beta)


def exact_current(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], phi: Optional[float] = None,
                  beta: Optional[float] = None, bond: Optional[int] = None, dim_cap: int = DIM_CAP) -> float:
    """
    Equilibrium current of the closed system from occupied single-particle modes.

    Returns:
        sum_n w_n <psi_n|J|psi_n> / doubling with w_n = Theta(-eps_n) or f_FD(eps_n)
    """
    system = system if phi is None else system.with_phi(phi)
    spectrum = diagonalize_total(system, reservoirs, dim_cap=dim_cap)
    current = total_current_operator(system, reservoirs, bond)
    return spectrum.thermal_expectation(current, beta)


def exact_site_currents(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], phi: Optional[float] = None,
                        beta: Optional[float] = None, bonds: Optional[Sequence[int]] = None,
                        dim_cap: int = DIM_CAP) -> np.ndarray:
    """Exact current on each normal bond from a single diagonalization."""
    system = system if phi is None else system.with_phi(phi)
    spectrum = diagonalize_total(system, reservoirs, dim_cap=dim_cap)
    bonds = list(system.normal_bonds) if bonds is None else list(bonds)
    return np.array([
        spectrum.thermal_expectation(total_current_operator(system, reservoirs, bond), beta)
        for bond in bonds
    ])


def exact_tunnel_current(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], index: int,
                         phi: Optional[float] = None, beta: Optional[float] = None,
                         dim_cap: int = DIM_CAP) -> float:
    """Leakage current from the device into reservoir ``index``; zero in equilibrium."""
    spectrum = diagonalize_total(system, reservoirs, phi, dim_cap)
    return spectrum.thermal_expectation(tunnel_current_operator(system, reservoirs, index), beta)


def exact_ground_energy_current(system: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                                phi: Optional[float] = None, delta_phi: float = DELTA_PHI,
                                dim_cap: int = DIM_CAP) -> float:
    """
    Current from the ground-state energy, doubling * dE_0/dphi.

    E_0 = sum_{eps_n <= 0} eps_n / doubling, differentiated by central differences.
    """
    if not delta_phi > 0.0:
        raise DomainError(f"finite-difference step must be positive, got {delta_phi}")
    phi = system.phi if phi is None else phi
    _check_dimension(system, reservoirs, dim_cap)
    upper = _ground_energy(system, reservoirs, phi + delta_phi)
    lower = _ground_energy(system, reservoirs, phi - delta_phi)
    return system.doubling * (upper - lower) / (2.0 * delta_phi)


def exact_free_energy_current(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], beta: float,
                              phi: Optional[float] = None, delta_phi: float = DELTA_PHI,
                              dim_cap: int = DIM_CAP) -> float:
    """
    Thermal current from the grand potential.

    Normal: F = -(1/beta) sum ln(1 + e^{-beta eps}), I = dF/dphi.
    BdG:    I = 2 dF/dphi with F = -(1/beta) sum_{eps >= 0} ln(2 cosh(beta eps / 2)).
    Both are evaluated with logaddexp so large beta*eps cannot overflow.
    """
    if not beta > 0.0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")
    if not delta_phi > 0.0:
        raise DomainError(f"finite-difference step must be positive, got {delta_phi}")
    phi = system.phi if phi is None else phi
    _check_dimension(system, reservoirs, dim_cap)
    upper = _free_energy(system, reservoirs, phi + delta_phi, beta)
    lower = _free_energy(system, reservoirs, phi - delta_phi, beta)
    return (upper - lower) / (2.0 * delta_phi)


def bogoliubov_current_amplitudes(spectrum: HermitianSpectrum, current: np.ndarray) -> BogoliubovAmplitudes:
    """
    Split W^dag J W into the Bogoliubov-mode blocks.

    For a BdG spectrum sorted ascending the partner of positive mode m + k is
    mode m - 1 - k (eps -> -eps).

    Args:
        spectrum: Spectrum of the total system
        current: Current operator in the same basis

    Returns:
        BogoliubovAmplitudes over the positive-energy modes
    """
    matrix = spectrum.in_eigenbasis(current)
    if spectrum.doubling == 1:
        n = spectrum.dim
        return BogoliubovAmplitudes(energies=spectrum.eigenvalues.copy(), a_block=matrix,
                                    b_block=np.zeros((n, n), dtype=complex))

    half = spectrum.dim // 2
    positive = np.arange(half, spectrum.dim)
    partners = half - 1 - np.arange(half)
    a_block = matrix[np.ix_(positive, positive)]
    b_block = matrix[np.ix_(partners, positive)]
    return BogoliubovAmplitudes(energies=spectrum.eigenvalues[positive], a_block=a_block,
                                b_block=b_block)
