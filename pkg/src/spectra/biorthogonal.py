"""
Biorthogonal eigendecomposition of non-Hermitian effective Hamiltonians.

Right eigenvectors come from H, left eigenvectors from a separate
diagonalization of H^dag. The two sets are paired by a one-to-one assignment
on |<L|R>|, biorthogonalized inside (near-)degenerate clusters, and scaled so
that <L_n|R_n> = 1 with both vectors carrying the same norm.
"""

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from src.models.self_energy import EffectiveHamiltonian
from src.utils.errors import DefectiveError, DomainError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger("biorthogonal")

RIGIDITY_FLOOR = 1e-10
HERMITIAN_TOL = 1e-14
CLUSTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class BiorthogonalSpectrum:
    """Eigenvalues with matched, normalized left/right eigenvectors (columns)."""
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    phase_rigidity: np.ndarray
    doubling: int = 1
    phi: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.right_vectors.shape[0]

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def min_rigidity(self) -> float:
        return float(np.min(self.phase_rigidity))

    def overlap_matrix(self) -> np.ndarray:
        """<L_n|R_m>; the identity for a valid biorthonormal basis."""
        return self.left_vectors.conj().T @ self.right_vectors

    def completeness_residual(self) -> float:
        identity = np.eye(self.dim)
        return float(np.max(np.abs(self.right_vectors @ self.left_vectors.conj().T - identity)))

    def reconstruct(self) -> np.ndarray:
        """sum_n eps_n |R_n><L_n|."""
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors.conj().T

    def expectation_lr(self, operator: np.ndarray) -> np.ndarray:
        """Per-mode <L_n|O|R_n>."""
        return np.einsum('in,ij,jn->n', self.left_vectors.conj(), operator, self.right_vectors)

    def expectation_rl(self, operator: np.ndarray) -> np.ndarray:
        """Per-mode <R_n|O|L_n>."""
        return np.einsum('in,ij,jn->n', self.right_vectors.conj(), operator, self.left_vectors)

    def expectation_rr(self, operator: np.ndarray) -> np.ndarray:
        """Per-mode <R_n|O|R_n> / <R_n|R_n>."""
        weights = np.einsum('in,ij,jn->n', self.right_vectors.conj(), operator, self.right_vectors)
        norms = np.einsum('in,in->n', self.right_vectors.conj(), self.right_vectors).real
        return weights / norms


def _is_hermitian(matrix: np.ndarray, scale: float) -> bool:
    return float(np.max(np.abs(matrix - matrix.conj().T))) <= HERMITIAN_TOL * scale


def _degenerate_clusters(values: np.ndarray, tol: float) -> List[np.ndarray]:
    """Group indices whose eigenvalues are chained within ``tol`` of each other."""
    order = np.lexsort((values.imag, values.real))
    clusters: List[List[int]] = []
    for index in order:
        placed = False
        for cluster in clusters:
            if np.min(np.abs(values[cluster] - values[index])) <= tol:
                cluster.append(int(index))
                placed = True
                break
        if not placed:
            clusters.append([int(index)])
    return [np.array(c, dtype=int) for c in clusters]


def biorthogonal_eig(hamiltonian: Union[EffectiveHamiltonian, np.ndarray],
                     rigidity_floor: float = RIGIDITY_FLOOR,
                     doubling: Optional[int] = None) -> BiorthogonalSpectrum:
    """
    Solve H|R> = eps|R>, H^dag|L> = eps^*|L> and build the biorthonormal basis.

    Args:
        hamiltonian: EffectiveHamiltonian or a bare square matrix
        rigidity_floor: Smallest acceptable pre-normalization overlap
        doubling: Overrides the doubling factor for bare matrices

    Returns:
        BiorthogonalSpectrum sorted by (Re eps, Im eps)

    Raises:
        DefectiveError: the matrix is numerically defective (exceptional point)
    """
    if isinstance(hamiltonian, EffectiveHamiltonian):
        matrix = hamiltonian.matrix
        phi = hamiltonian.phi
        doubling = hamiltonian.doubling if doubling is None else doubling
    else:
        matrix = np.asarray(hamiltonian, dtype=complex)
        phi = None
        doubling = 1 if doubling is None else doubling

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix has non-finite entries")

    scale = max(1.0, float(np.max(np.abs(matrix))))

    if _is_hermitian(matrix, scale):
        values, vectors = linalg.eigh(matrix)
        values = values.astype(complex)
        return BiorthogonalSpectrum(
            eigenvalues=values,
            right_vectors=vectors,
            left_vectors=vectors.copy(),
            phase_rigidity=np.ones(values.shape[0]),
            doubling=doubling,
            phi=phi,
        )

    values, right = linalg.eig(matrix)
    _, left = linalg.eig(matrix.conj().T)
    right = right / np.linalg.norm(right, axis=0)
    left = left / np.linalg.norm(left, axis=0)

    overlaps = np.abs(left.conj().T @ right)
    left_rows, right_cols = linear_sum_assignment(-overlaps)
    matched = np.empty(values.shape[0], dtype=int)
    matched[right_cols] = left_rows
    left = left[:, matched]

    for cluster in _degenerate_clusters(values, CLUSTER_TOL * scale):
        if cluster.size == 1:
            continue
        gram = left[:, cluster].conj().T @ right[:, cluster]
        if np.min(np.linalg.svd(gram, compute_uv=False)) < rigidity_floor:
            raise DefectiveError(
                f"defective eigenvalue cluster at eps = {values[cluster[0]]:.6g}",
                phi=phi, min_overlap=0.0,
            )
        block = left[:, cluster] @ np.linalg.inv(gram).conj().T
        left[:, cluster] = block / np.linalg.norm(block, axis=0)

    diag_overlap = np.einsum('in,in->n', left.conj(), right)
    rigidity = np.abs(diag_overlap)
    if np.min(rigidity) < rigidity_floor:
        worst = int(np.argmin(rigidity))
        raise DefectiveError(
            f"phase rigidity {rigidity[worst]:.3e} below floor {rigidity_floor:.1e} "
            f"at eps = {values[worst]:.6g}",
            phi=phi, min_overlap=float(rigidity[worst]),
        )

    root = np.sqrt(diag_overlap)
    right = right / root
    left = left / root.conj()

    order = np.lexsort((values.imag, values.real))
    logger.debug(f"Biorthogonal basis of dim {values.shape[0]}, min rigidity {np.min(rigidity):.3e}")
    return BiorthogonalSpectrum(
        eigenvalues=values[order],
        right_vectors=right[:, order],
        left_vectors=left[:, order],
        phase_rigidity=rigidity[order],
        doubling=doubling,
        phi=phi,
    )


def eigenvalues_only(hamiltonian: Union[EffectiveHamiltonian, np.ndarray]) -> np.ndarray:
    """Eigenvalues of H sorted by (Re, Im); continuous through exceptional points."""
    matrix = hamiltonian.matrix if isinstance(hamiltonian, EffectiveHamiltonian) else np.asarray(hamiltonian)
    values = linalg.eigvals(matrix)
    return values[np.lexsort((values.imag, values.real))]
