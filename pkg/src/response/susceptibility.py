"""
Imaginary part of the current susceptibility Im Pi(phi, omega).

The non-Hermitian evaluation integrates products of biorthogonal spectral
functions analytically at zero temperature; the Hermitian counterpart is the
Lorentzian-broadened Kubo sum over eigenmodes of the closed system.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.models.tight_binding import ModelSpec, ReservoirSpec, check_current_bond, total_current_operator
from src.numerics.special_functions import TOL_IM, fermi_dirac, log_lower, log_upper
from src.oracle.hermitian_oracle import DIM_CAP, bogoliubov_current_amplitudes, diagonalize_total
from src.spectra.biorthogonal import BiorthogonalSpectrum
from src.utils.errors import DomainError, SpecError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger("susceptibility")

DEGENERATE_DENOMINATOR = 1e-10
DEFAULT_ETA = 0.03
# omega chunk size for the Kubo sum; bounds the (pairs x omega) work array
_KUBO_CHUNK = 64

IndexQuad = Tuple[int, int, int, int]


class SusceptibilityMethod(str, Enum):
    NH_ANALYTIC = "nh_analytic"
    NH_BROADENED = "nh_broadened"
    HERMITIAN_EXACT = "hermitian_exact"


@dataclass
class SusceptibilityMap:
    """Im Pi on a (phi, omega) grid; rows follow phi, columns follow omega."""
    phi_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray
    method: SusceptibilityMethod
    eta: Optional[float] = None
    normalization: float = field(init=False, default=1.0)

    def __post_init__(self):
        self.phi_grid = np.asarray(self.phi_grid, dtype=float)
        self.omega_grid = np.asarray(self.omega_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.method = SusceptibilityMethod(self.method)
        expected = (self.phi_grid.shape[0], self.omega_grid.shape[0])
        if self.values.shape != expected:
            raise SpecError(f"susceptibility values have shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"non-finite entries in the {self.method.value} susceptibility map")
        scale = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        self.normalization = scale if scale > 0.0 else 1.0

    def normalized(self) -> np.ndarray:
        """Values divided by their own max-abs."""
        return self.values / self.normalization

    def to_frame(self, normalized: bool = False) -> pd.DataFrame:
        """phi column followed by one column per omega value."""
        data = self.normalized() if normalized else self.values
        frame = pd.DataFrame(data, columns=[f"{w:.17g}" for w in self.omega_grid])
        frame.insert(0, 'phi', self.phi_grid)
        return frame

    def header(self) -> Dict[str, Any]:
        return {
            'method': self.method.value,
            'eta': self.eta,
            'normalization': self.normalization,
            'phi_count': int(self.phi_grid.shape[0]),
            'omega_count': int(self.omega_grid.shape[0]),
            'omega_min': float(self.omega_grid.min()) if self.omega_grid.size else None,
            'omega_max': float(self.omega_grid.max()) if self.omega_grid.size else None,
        }


def _divided_difference(x: np.ndarray, y: np.ndarray, fx: np.ndarray, fy: np.ndarray,
                        tol: float) -> np.ndarray:
    """(F(x) - F(y)) / (x - y) with F = -(1/pi) log; the derivative limit near x = y."""
    diff = x - y
    close = np.abs(diff) < tol
    safe = np.where(close, 1.0, diff)
    regular = (fx - fy) / safe
    midpoint = 0.5 * (x + y)
    limit = -1.0 / (np.pi * np.where(close, midpoint, 1.0))
    return np.where(close, limit, regular)


def _mode_coefficients(spectrum: BiorthogonalSpectrum, a: int, b: int) -> Tuple[np.ndarray, np.ndarray]:
    """<a|R_n><L_n|b> and <a|L_n><R_n|b> for every mode n."""
    right, left = spectrum.right_vectors, spectrum.left_vectors
    return right[a] * left[b].conj(), left[a] * right[b].conj()


def _p_integrals(spectrum: BiorthogonalSpectrum, quads: Sequence[IndexQuad], omegas: np.ndarray,
                 tol: float, tol_im: float) -> np.ndarray:
    """P_{ijkl}(omega) for several index quadruples; shape (len(quads), len(omegas))."""
    eps = spectrum.eigenvalues
    eps_c = eps.conj()
    omegas = np.asarray(omegas, dtype=float)

    # F on the four argument families; eps-derived use the lower branch, eps^*-derived the upper.
    f_n = -np.asarray(log_lower(eps, tol_im)) / np.pi
    f_n_c = -np.asarray(log_upper(eps_c, tol_im)) / np.pi
    shifted = eps[None, :] - omegas[:, None]
    shifted_c = eps_c[None, :] - omegas[:, None]
    f_m = -np.asarray(log_lower(shifted, tol_im)) / np.pi
    f_m_c = -np.asarray(log_upper(shifted_c, tol_im)) / np.pi

    def kernel(x, fx, y, fy):
        # (omega, n, m)
        return _divided_difference(x[None, :, None], y[:, None, :], fx[None, :, None], fy[:, None, :], tol)

    d_nm = kernel(eps, f_n, shifted, f_m)
    d_n_mc = kernel(eps, f_n, shifted_c, f_m_c)
    d_nc_m = kernel(eps_c, f_n_c, shifted, f_m)
    d_nc_mc = kernel(eps_c, f_n_c, shifted_c, f_m_c)

    result = np.empty((len(quads), omegas.shape[0]), dtype=complex)
    for row, (i, j, k, l) in enumerate(quads):
        a, a_bar = _mode_coefficients(spectrum, i, j)
        b, b_bar = _mode_coefficients(spectrum, k, l)
        total = (
            np.einsum('n,m,wnm->w', a, b, d_nm)
            - np.einsum('n,m,wnm->w', a, b_bar, d_n_mc)
            - np.einsum('n,m,wnm->w', a_bar, b, d_nc_m)
            + np.einsum('n,m,wnm->w', a_bar, b_bar, d_nc_mc)
        )
        result[row] = total / (4.0 * np.pi)
    return result


def p_integral(spectrum: BiorthogonalSpectrum, i: int, j: int, k: int, l: int,
               omega: Union[float, np.ndarray], degenerate_tol: float = DEGENERATE_DENOMINATOR,
               tol_im: float = TOL_IM) -> Union[complex, np.ndarray]:
    """
    Zero-temperature P_ijkl(omega) = int_{-inf}^0 <i|rho(w')|j> <k|rho(w' + omega)|l> dw'.

    Args:
        spectrum: Biorthogonal spectrum of H_eff
        i, j, k, l: Basis indices
        omega: Frequency or array of frequencies
        degenerate_tol: Denominator modulus below which the derivative limit is used
        tol_im: Passivity clamp of the logarithms

    Returns:
        Complex value (array for array input)
    """
    for index in (i, j, k, l):
        if not 0 <= index < spectrum.dim:
            raise SpecError(f"index {index} outside the basis of dimension {spectrum.dim}")
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    values = _p_integrals(spectrum, [(i, j, k, l)], omegas, degenerate_tol, tol_im)[0]
    if np.ndim(omega) == 0:
        return complex(values[0])
    return values


def susceptibility_quads(system: ModelSpec, bond: int) -> List[Tuple[int, IndexQuad]]:
    """Signed index quadruples whose P-integrals build the bond's response kernel."""
    j, jp = bond, bond + 1
    quads = [
        (+1, (jp, j, jp, j)),
        (-1, (j, j, jp, jp)),
        (+1, (j, jp, j, jp)),
        (-1, (jp, jp, j, j)),
    ]
    if system.is_bdg:
        n = system.n_sites
        quads += [
            (+1, (n + jp, j, jp, n + j)),
            (-1, (n + j, j, jp, n + jp)),
            (+1, (n + j, jp, j, n + jp)),
            (-1, (n + jp, jp, j, n + j)),
        ]
    return quads


def _susceptibility_bond(system: ModelSpec, bond: Optional[int]) -> int:
    bond = system.default_current_bond if bond is None else bond
    check_current_bond(system, bond)
    if bond == system.flux_bond:
        raise SpecError(f"bond {bond} carries the flux; choose another ring bond for the susceptibility")
    if bond + 1 >= system.n_sites:
        raise SpecError(f"bond {bond} has no right neighbour inside the device")
    return bond


def im_susceptibility_nh(spectrum: BiorthogonalSpectrum, system: ModelSpec, omega: Union[float, np.ndarray],
                         bond: Optional[int] = None, degenerate_tol: float = DEGENERATE_DENOMINATOR,
                         tol_im: float = TOL_IM) -> Union[float, np.ndarray]:
    """
    Im Pi = pi t_j^2 Re[PP(+omega) - PP(-omega)] from the biorthogonal modes.

    Args:
        spectrum: Biorthogonal spectrum of H_eff at the phase of interest
        system: Device spec (bond hopping and BdG layout)
        omega: Frequency or array of frequencies
        bond: Bond j, defaults to the first normal bond; ring flux bond rejected
        degenerate_tol: Forwarded to the P-integral
        tol_im: Passivity clamp

    Returns:
        Real value (array for array input)
    """
    bond = _susceptibility_bond(system, bond)
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    signed = susceptibility_quads(system, bond)
    quads = [quad for _, quad in signed]
    signs = np.array([sign for sign, _ in signed], dtype=float)

    both = np.concatenate([omegas, -omegas])
    p_values = _p_integrals(spectrum, quads, both, degenerate_tol, tol_im)
    kernel = signs @ p_values
    hopping = abs(system.bond_hopping(bond))
    values = np.pi * hopping ** 2 * (kernel[:omegas.shape[0]] - kernel[omegas.shape[0]:]).real

    if np.ndim(omega) == 0:
        return float(values[0])
    return values


# fine-grid spacing and half-window of the Lorentzian convolution, in units of eta
_BROADENING_STEP = 0.125
_BROADENING_WINDOW = 50.0
_FINE_CHUNK = 256


def lorentzian_broaden(omega_grid: np.ndarray, fine_grid: np.ndarray, fine_values: np.ndarray,
                       eta: float) -> np.ndarray:
    """Convolve samples on a uniform fine grid with (eta/pi) / (x^2 + eta^2), read off at omega_grid."""
    step = fine_grid[1] - fine_grid[0]
    values = np.empty(omega_grid.shape[0])
    for start in range(0, omega_grid.shape[0], _KUBO_CHUNK):
        chunk = omega_grid[start:start + _KUBO_CHUNK]
        kernel = (eta / np.pi) / ((chunk[:, None] - fine_grid[None, :]) ** 2 + eta ** 2)
        values[start:start + _KUBO_CHUNK] = kernel @ fine_values * step
    return values


def im_susceptibility_nh_broadened(spectrum: BiorthogonalSpectrum, system: ModelSpec, omega_grid: np.ndarray,
                                   eta: float = DEFAULT_ETA, bond: Optional[int] = None,
                                   degenerate_tol: float = DEGENERATE_DENOMINATOR,
                                   tol_im: float = TOL_IM) -> np.ndarray:
    """
    NH susceptibility convolved with the Lorentzian of the Kubo sum.

    The analytic map is sampled on a grid of spacing eta/8, symmetric about
    zero and reaching 50 eta past the largest |omega|, so oddness in omega
    carries over to the broadened values.

    Args:
        spectrum: Biorthogonal spectrum of H_eff
        system: Device spec
        omega_grid: Frequencies
        eta: Lorentzian half-width, > 0
        bond: Current bond, defaults to the first normal bond
        degenerate_tol: Forwarded to the P-integral
        tol_im: Passivity clamp

    Returns:
        Array aligned with omega_grid, comparable with ``susceptibility_exact``
    """
    if not eta > 0.0:
        raise DomainError(f"broadening eta must be positive, got {eta}")
    omega_grid = np.asarray(omega_grid, dtype=float)
    step = _BROADENING_STEP * eta
    reach = np.ceil((np.max(np.abs(omega_grid)) + _BROADENING_WINDOW * eta) / step)
    fine_grid = np.arange(-reach, reach + 1.0) * step
    fine_values = np.concatenate([
        im_susceptibility_nh(spectrum, system, fine_grid[start:start + _FINE_CHUNK], bond, degenerate_tol, tol_im)
        for start in range(0, fine_grid.shape[0], _FINE_CHUNK)
    ])
    return lorentzian_broaden(omega_grid, fine_grid, fine_values, eta)


def map_deviation(first: SusceptibilityMap, second: SusceptibilityMap) -> float:
    """Largest pointwise difference of two normalized maps on the same grid."""
    if first.values.shape != second.values.shape:
        raise SpecError(f"maps of shape {first.values.shape} and {second.values.shape} cannot be compared")
    return float(np.max(np.abs(first.normalized() - second.normalized())))


def _lorentzian_sum(omega_grid: np.ndarray, transition: np.ndarray, weight: np.ndarray,
                    eta: float) -> np.ndarray:
    """sum_t weight_t * eta / ((omega - transition_t)^2 + eta^2), chunked over omega."""
    keep = np.abs(weight) > 1e-14 * max(float(np.max(np.abs(weight))) if weight.size else 0.0, 1e-300)
    transition, weight = transition[keep], weight[keep]
    values = np.zeros(omega_grid.shape[0])
    if not weight.size:
        return values
    for start in range(0, omega_grid.shape[0], _KUBO_CHUNK):
        chunk = omega_grid[start:start + _KUBO_CHUNK]
        detuning = chunk[:, None] - transition[None, :]
        values[start:start + _KUBO_CHUNK] = (eta / (detuning ** 2 + eta ** 2)) @ weight
    return values


def susceptibility_exact(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], omega_grid: np.ndarray,
                         phi: Optional[float] = None, eta: float = DEFAULT_ETA, bond: Optional[int] = None,
                         beta: Optional[float] = None, dim_cap: int = DIM_CAP) -> np.ndarray:
    """
    Kubo sum of the closed system with Lorentzian broadening eta.

    With the current split into Bogoliubov blocks (A between positive modes,
    B between a partner and a positive mode), L(x) = eta / (x^2 + eta^2) and
    Omega_kq = E_k + E_q:

        Im Pi(omega) = -sum_pq |A_pq|^2 (f_p - f_q) L(omega - E_q + E_p)
                       - 1/2 sum_kq |B_kq|^2 (1 - f_k - f_q) [L(omega - Omega_kq) - L(omega + Omega_kq)]

    Normal systems keep only the first sum, over all modes.

    Args:
        system: Device spec
        reservoirs: Finite reservoirs
        omega_grid: Frequencies
        phi: Phase, defaults to ``system.phi``
        eta: Lorentzian half-width, > 0
        bond: Current bond, defaults to the first normal bond
        beta: Inverse temperature, None for zero temperature
        dim_cap: Largest admissible matrix dimension

    Returns:
        Array of Im Pi aligned with omega_grid
    """
    if not eta > 0.0:
        raise DomainError(f"broadening eta must be positive, got {eta}")
    bond = _susceptibility_bond(system, bond)
    system = system if phi is None else system.with_phi(phi)
    spectrum = diagonalize_total(system, reservoirs, dim_cap=dim_cap)
    amplitudes = bogoliubov_current_amplitudes(spectrum, total_current_operator(system, reservoirs, bond))

    energies = amplitudes.energies
    occupation = np.asarray(fermi_dirac(energies, beta), dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)

    normal_weight = np.abs(amplitudes.a_block) ** 2 * (occupation[:, None] - occupation[None, :])
    normal_transition = energies[None, :] - energies[:, None]
    values = -_lorentzian_sum(omega_grid, normal_transition.ravel(), normal_weight.ravel(), eta)

    if system.is_bdg:
        pair_weight = 0.5 * np.abs(amplitudes.b_block) ** 2 * (1.0 - occupation[:, None] - occupation[None, :])
        pair_energy = (energies[:, None] + energies[None, :]).ravel()
        pair_weight = pair_weight.ravel()
        values -= _lorentzian_sum(omega_grid, pair_energy, pair_weight, eta)
        values += _lorentzian_sum(omega_grid, -pair_energy, pair_weight, eta)

    logger.debug(f"Kubo sum over {energies.shape[0]} Bogoliubov modes at phi={spectrum.phi:.6f}")
    return values
