"""
Persistent-current evaluations.

The non-Hermitian current of an open system is obtained from the eigenvalues
of H_eff alone (trace formulas) or from the biorthogonal basis (operator form).
The LR and RR mode sums and the isolated-system current are provided as
reference definitions.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from src.models.self_energy import effective_hamiltonian
from src.models.tight_binding import ModelSpec, ReservoirSpec, build_system, current_operator
from src.numerics.special_functions import TOL_IM, fermi_dirac, log_gamma, log_lower
from src.observables.correlators import expect_quadratic
from src.spectra.biorthogonal import BiorthogonalSpectrum, eigenvalues_only
from src.utils.errors import DomainError, SpecError

DELTA_PHI = 1e-4
ZERO_GUARD = 1e-12


def trace_functional(eigenvalues: np.ndarray, zero_guard: float = ZERO_GUARD,
                     tol_im: float = TOL_IM) -> complex:
    """sum_n eps_n ln eps_n on the lower branch; terms with |eps_n| < zero_guard vanish."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    keep = np.abs(eigenvalues) >= zero_guard
    if not np.any(keep):
        return 0j
    kept = eigenvalues[keep]
    return complex(np.sum(kept * np.asarray(log_lower(kept, tol_im))))


def thermal_functional(eigenvalues: np.ndarray, beta: float, tol_im: float = TOL_IM) -> float:
    """(2/beta) sum_n Re logGamma(1/2 + i beta eps_n / 2pi)."""
    if not beta > 0.0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if np.any(eigenvalues.imag > tol_im):
        raise DomainError(f"eigenvalue with Im eps = {float(np.max(eigenvalues.imag)):.3e} is not passive")
    argument = 0.5 + 1j * beta * eigenvalues / (2.0 * np.pi)
    return float(2.0 / beta * np.sum(np.asarray(log_gamma(argument)).real))


def _central_difference(functional: Callable[[float], complex], phi: float, delta_phi: float) -> complex:
    if not delta_phi > 0.0:
        raise DomainError(f"finite-difference step must be positive, got {delta_phi}")
    return (functional(phi + delta_phi) - functional(phi - delta_phi)) / (2.0 * delta_phi)


def _eigenvalues_at(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], phi: float) -> np.ndarray:
    return eigenvalues_only(effective_hamiltonian(system.with_phi(phi), reservoirs))


def persistent_current_trace(system: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                             phi: Optional[float] = None, delta_phi: float = DELTA_PHI,
                             zero_guard: float = ZERO_GUARD, tol_im: float = TOL_IM) -> float:
    """
    Zero-temperature current I = -(1/pi) d/dphi Im Tr(H_eff ln H_eff).

    The trace is an eigenvalue sum, so the result stays continuous through
    exceptional points where H_eff is defective.

    Args:
        system: Device spec
        reservoirs: Attached reservoirs (may be empty)
        phi: Phase, defaults to ``system.phi``
        delta_phi: Central-difference step
        zero_guard: Modulus below which eps ln eps is replaced by 0
        tol_im: Passivity clamp

    Returns:
        Current in units of e/hbar
    """
    phi = system.phi if phi is None else phi

    def functional(p: float) -> complex:
        return trace_functional(_eigenvalues_at(system, reservoirs, p), zero_guard, tol_im).imag

    return float(-_central_difference(functional, phi, delta_phi).real / np.pi)


def persistent_current_trace_ph(system: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                                phi: Optional[float] = None, delta_phi: float = DELTA_PHI,
                                zero_guard: float = ZERO_GUARD, tol_im: float = TOL_IM) -> complex:
    """
    Supercurrent (i/pi) d/dphi Tr(H_eff ln H_eff) without taking a real part.

    Particle-hole pairing (eps, -eps^*) makes d/dphi Re Tr(H_eff ln H_eff)
    vanish, so the imaginary part of the returned value is zero up to
    finite-difference error and the real part is the current.
    """
    if not system.is_bdg:
        raise SpecError("the particle-hole form only applies to BdG systems")
    phi = system.phi if phi is None else phi

    def functional(p: float) -> complex:
        return trace_functional(_eigenvalues_at(system, reservoirs, p), zero_guard, tol_im)

    return complex(1j / np.pi * _central_difference(functional, phi, delta_phi))


def persistent_current_finiteT(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], beta: float,
                               phi: Optional[float] = None, delta_phi: float = DELTA_PHI,
                               tol_im: float = TOL_IM) -> float:
    """
    Finite-temperature current I = (2/beta) d/dphi Re Tr logGamma(1/2 + i beta H_eff / 2pi).

    Args:
        system: Device spec
        reservoirs: Attached reservoirs
        beta: Inverse temperature, > 0
        phi: Phase, defaults to ``system.phi``
        delta_phi: Central-difference step
        tol_im: Passivity clamp

    Returns:
        Current in units of e/hbar
    """
    phi = system.phi if phi is None else phi

    def functional(p: float) -> float:
        return thermal_functional(_eigenvalues_at(system, reservoirs, p), beta, tol_im)

    return float(_central_difference(functional, phi, delta_phi).real)


def _occupied(spectrum: BiorthogonalSpectrum) -> np.ndarray:
    return spectrum.eigenvalues.real <= 0.0


def current_lr(spectrum: BiorthogonalSpectrum, current: np.ndarray) -> complex:
    """LR-basis current sum_{Re eps <= 0} <L_n|J|R_n> / doubling."""
    values = spectrum.expectation_lr(current)[_occupied(spectrum)]
    return complex(np.sum(values) / spectrum.doubling)


def current_rr(spectrum: BiorthogonalSpectrum, current: np.ndarray) -> float:
    """RR-basis current with unit-norm right vectors."""
    values = spectrum.expectation_rr(current)[_occupied(spectrum)]
    return float(np.sum(values).real / spectrum.doubling)


def current_rr_site_resolved(spectrum: BiorthogonalSpectrum, system: ModelSpec,
                             bonds: Optional[Sequence[int]] = None) -> np.ndarray:
    """RR current on each bond; ``system`` must carry the spectrum's phase."""
    bonds = list(system.normal_bonds) if bonds is None else list(bonds)
    return np.array([current_rr(spectrum, current_operator(system, bond)) for bond in bonds])


def operator_current_site_resolved(spectrum: BiorthogonalSpectrum, system: ModelSpec,
                                   bonds: Optional[Sequence[int]] = None,
                                   beta: Optional[float] = None) -> np.ndarray:
    """Non-Hermitian operator current Im Tr[J f_eff(H_eff)] / doubling on each bond."""
    bonds = list(system.normal_bonds) if bonds is None else list(bonds)
    return np.array([expect_quadratic(spectrum, current_operator(system, bond), beta=beta) for bond in bonds])


def isolated_current(system: ModelSpec, phi: Optional[float] = None, beta: Optional[float] = None,
                     bond: Optional[int] = None) -> float:
    """
    Current of the isolated Hermitian device.

    Args:
        system: Device spec
        phi: Phase, defaults to ``system.phi``
        beta: Inverse temperature, None for the ground state (eps = 0 counts occupied)
        bond: Bond of the current operator, defaults to the first normal bond

    Returns:
        sum_n f_FD(eps_n) <psi_n|J|psi_n> / doubling
    """
    system = system if phi is None else system.with_phi(phi)
    values, vectors = linalg.eigh(build_system(system))
    weights = fermi_dirac(values, beta)
    current = current_operator(system, bond)
    per_mode = np.einsum('in,ij,jn->n', vectors.conj(), current, vectors).real
    return float(np.sum(weights * per_mode) / system.doubling)


@dataclass
class CurrentCurve:
    """Current-phase relations evaluated by several methods on one phase grid."""
    phi_grid: np.ndarray
    values: Dict[str, np.ndarray] = field(default_factory=dict)
    beta: Optional[float] = None
    model_hash: str = ""

    def __post_init__(self):
        self.phi_grid = np.asarray(self.phi_grid, dtype=float)
        for name, column in self.values.items():
            self.add(name, column)

    def add(self, method: str, column: Sequence[complex]) -> None:
        column = np.asarray(column)
        if column.shape != self.phi_grid.shape:
            raise SpecError(
                f"method '{method}' has {column.shape[0] if column.ndim else 0} values "
                f"for {self.phi_grid.shape[0]} grid points"
            )
        self.values[method] = column

    @property
    def methods(self) -> List[str]:
        return list(self.values)

    def to_frame(self) -> pd.DataFrame:
        """phi column followed by one column per method; complex methods split into _re/_im."""
        data = {'phi': self.phi_grid}
        for name, column in self.values.items():
            if np.iscomplexobj(column):
                data[f"{name}_re"] = column.real
                data[f"{name}_im"] = column.imag
            else:
                data[name] = column
        return pd.DataFrame(data)
