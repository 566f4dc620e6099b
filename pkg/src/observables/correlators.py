"""
Equilibrium correlators and quadratic-operator expectations of open systems.

Both are evaluated from a biorthogonal spectrum with the non-Hermitian
Fermi-Dirac distribution f_eff in place of the ordinary occupation.
"""

from typing import Optional

import numpy as np

from src.numerics.special_functions import TOL_IM, f_eff_beta, f_eff_zero
from src.spectra.biorthogonal import BiorthogonalSpectrum
from src.utils.errors import DomainError


def distribution(spectrum: BiorthogonalSpectrum, beta: Optional[float] = None,
                 tol_im: float = TOL_IM) -> np.ndarray:
    """f_eff of every mode; ``beta=None`` is zero temperature."""
    if beta is None:
        return np.asarray(f_eff_zero(spectrum.eigenvalues, tol_im))
    return np.asarray(f_eff_beta(spectrum.eigenvalues, beta, tol_im))


def correlator_matrix(spectrum: BiorthogonalSpectrum, beta: Optional[float] = None,
                      tol_im: float = TOL_IM) -> np.ndarray:
    """
    Single-particle density matrix G_ij = <c^dag_i c_j>.

    With X = L^* diag(f_eff) R^T the correlator is (X - X^dag) / 2i. For a BdG
    spectrum the returned matrix spans the doubled basis, so the block
    G[i, N + j] holds the anomalous correlator <c^dag_i c^dag_j>.

    Args:
        spectrum: Biorthogonal spectrum of H_eff
        beta: Inverse temperature or None for zero temperature
        tol_im: Passivity clamp forwarded to f_eff

    Returns:
        Hermitian matrix of shape (dim, dim)
    """
    weights = distribution(spectrum, beta, tol_im)
    x = (spectrum.left_vectors.conj() * weights) @ spectrum.right_vectors.T
    return (x - x.conj().T) / 2j


def expect_quadratic(spectrum: BiorthogonalSpectrum, operator: np.ndarray,
                     beta: Optional[float] = None, shift: complex = 0.0,
                     conj_shift: Optional[complex] = None, tol_im: float = TOL_IM) -> float:
    """
    Expectation value of a quadratic operator O = C^dag O C / doubling.

    Evaluates (1/2i) sum_n [<L_n|O|R_n> (f_n + C1) - <R_n|O|L_n> (f_n + C2)^*]
    divided by the doubling factor. With C1 = C2 = 0 this is
    Im sum_n <L_n|O|R_n> f_eff(eps_n) / doubling.

    Args:
        spectrum: Biorthogonal spectrum of H_eff
        operator: Hermitian matrix in the same basis
        beta: Inverse temperature or None for zero temperature
        shift: Gauge shift C1 added to f_eff
        conj_shift: Gauge shift C2 added inside the conjugated term, defaults to C1
        tol_im: Passivity clamp forwarded to f_eff

    Returns:
        Real expectation value
    """
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (spectrum.dim, spectrum.dim):
        raise DomainError(f"operator shape {operator.shape} does not match spectrum dim {spectrum.dim}")
    conj_shift = shift if conj_shift is None else conj_shift

    weights = distribution(spectrum, beta, tol_im)
    lr = spectrum.expectation_lr(operator)
    rl = spectrum.expectation_rl(operator)
    total = np.sum(lr * (weights + shift) - rl * np.conj(weights + conj_shift)) / 2j
    return float(total.real) / spectrum.doubling
