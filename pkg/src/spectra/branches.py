"""
Branch tracking across a phase sweep and exceptional-point detection.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.models.self_energy import EffectiveHamiltonian
from src.utils.errors import AmbiguityWarning, DefectiveError, SpecError
from src.utils.logger import get_pipeline_logger
from src.spectra.biorthogonal import BiorthogonalSpectrum, biorthogonal_eig, eigenvalues_only

logger = get_pipeline_logger("branches")

AMBIGUITY_TOL = 1e-12
EP_GAP_TOL = 1e-3
EP_RIGIDITY_TOL = 0.1
EP_REFINE_WIDTH = 1e-6
# Rigidity threshold on grid points when no builder is available for refinement.
COARSE_RIGIDITY_TOL = 0.5


@dataclass
class BranchTracking:
    """Branch-ordered eigenvalues; ``order[k]`` maps branch -> index in the input list k."""
    values: np.ndarray
    order: np.ndarray
    unresolved: np.ndarray
    ambiguities: List[Tuple[int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class ExceptionalPoint:
    """An exceptional point bracketed by two grid points."""
    phi_low: float
    phi_high: float
    phi_estimate: float
    mode_a: int
    mode_b: int
    min_distance: float
    min_rigidity: float
    refined: bool

    def contains(self, phi: float, margin: float = 0.0) -> bool:
        return self.phi_low - margin <= phi <= self.phi_high + margin


def _swap_gap(cost: np.ndarray, cols: np.ndarray) -> float:
    """Smallest cost increase from exchanging the targets of any two branches."""
    if cols.size < 2:
        return np.inf
    reordered = cost[:, cols]
    best = np.diag(reordered)
    delta = reordered + reordered.T - best[:, None] - best[None, :]
    np.fill_diagonal(delta, np.inf)
    return float(np.min(delta))


def track_branches(eigenvalue_lists: Sequence[np.ndarray],
                   unresolved: Optional[Sequence[bool]] = None) -> BranchTracking:
    """
    Connect eigenvalues at consecutive grid points into continuous branches.

    Each step solves a minimal-total-distance assignment against a linear
    extrapolation of the previous two points, so crossing levels keep their
    identity.

    Args:
        eigenvalue_lists: One array of eigenvalues per grid point, equal lengths
        unresolved: Optional per-point flags (e.g. inside an EP interval)

    Returns:
        BranchTracking with values[k, b] the eigenvalue of branch b at point k
    """
    points = [np.asarray(v, dtype=complex) for v in eigenvalue_lists]
    if not points:
        return BranchTracking(np.zeros((0, 0), complex), np.zeros((0, 0), int), np.zeros(0, bool))
    n_modes = points[0].shape[0]
    if any(p.shape != (n_modes,) for p in points):
        raise SpecError("all grid points need the same number of eigenvalues")

    flags = np.zeros(len(points), dtype=bool) if unresolved is None else np.asarray(unresolved, dtype=bool)
    values = np.empty((len(points), n_modes), dtype=complex)
    order = np.empty((len(points), n_modes), dtype=int)
    values[0] = points[0]
    order[0] = np.arange(n_modes)
    ambiguities: List[Tuple[int, float]] = []

    for k in range(1, len(points)):
        if k >= 2 and not flags[k - 1] and not flags[k - 2]:
            predicted = 2.0 * values[k - 1] - values[k - 2]
        else:
            predicted = values[k - 1]
        cost = np.abs(predicted[:, None] - points[k][None, :])
        _, cols = linear_sum_assignment(cost)
        values[k] = points[k][cols]
        order[k] = cols

        gap = _swap_gap(cost, cols)
        if gap < AMBIGUITY_TOL:
            ambiguities.append((k, gap))

    if ambiguities:
        warnings.warn(
            f"{len(ambiguities)} ambiguous branch assignment(s), first at grid index {ambiguities[0][0]}",
            AmbiguityWarning,
            stacklevel=2,
        )

    return BranchTracking(values=values, order=order, unresolved=flags, ambiguities=ambiguities)


def _interval_min(d0: complex, d1: complex) -> Tuple[float, float]:
    """Minimum of |d0 + s (d1 - d0)| over s in [0, 1] and its location."""
    slope = d1 - d0
    denom = abs(slope) ** 2
    s = 0.0 if denom == 0.0 else float(np.clip(-(np.conj(slope) * d0).real / denom, 0.0, 1.0))
    return abs(d0 + s * slope), s


def _pair_distance(matrix_eigs: np.ndarray, center: complex) -> Tuple[float, np.ndarray]:
    nearest = np.argsort(np.abs(matrix_eigs - center))[:2]
    return float(abs(matrix_eigs[nearest[0]] - matrix_eigs[nearest[1]])), nearest


def _pair_rigidity(hamiltonian: EffectiveHamiltonian, center: complex) -> float:
    try:
        spectrum = biorthogonal_eig(hamiltonian)
    except DefectiveError:
        return 0.0
    nearest = np.argsort(np.abs(spectrum.eigenvalues - center))[:2]
    return float(np.min(spectrum.phase_rigidity[nearest]))


def _refine(builder: Callable[[float], EffectiveHamiltonian], phi_low: float, phi_high: float,
            center_low: complex, center_high: complex, width: float) -> Tuple[float, float]:
    """Golden-section search of the pair distance inside [phi_low, phi_high]."""
    ratio = (np.sqrt(5.0) - 1.0) / 2.0

    def distance(phi: float) -> float:
        s = (phi - phi_low) / (phi_high - phi_low)
        center = center_low + s * (center_high - center_low)
        return _pair_distance(eigenvalues_only(builder(phi)), center)[0]

    a, b = phi_low, phi_high
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = distance(c), distance(d)
    while b - a > width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = distance(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = distance(d)
    best = 0.5 * (a + b)
    return best, distance(best)


def ep_scan(sweep: Sequence[EffectiveHamiltonian],
            spectra: Optional[Sequence[BiorthogonalSpectrum]] = None,
            gap_tol: float = EP_GAP_TOL,
            rigidity_tol: float = EP_RIGIDITY_TOL,
            builder: Optional[Callable[[float], EffectiveHamiltonian]] = None,
            refine_width: float = EP_REFINE_WIDTH) -> List[ExceptionalPoint]:
    """
    Locate exceptional points along a phase sweep.

    Between consecutive grid points the squared splitting (eps_a - eps_b)^2 of
    every branch pair is interpolated linearly (it is analytic through an EP);
    pairs whose interpolated minimum drops below gap_tol^2 are candidates.
    With a ``builder`` (phi -> EffectiveHamiltonian) candidates are refined by
    golden-section search and accepted when the rigidity there is below
    ``rigidity_tol``; otherwise the grid-point rigidity is compared with a
    coarser threshold.

    Args:
        sweep: Effective Hamiltonians on a sorted phase grid
        spectra: Optional precomputed spectra aligned with ``sweep``
        gap_tol: Eigenvalue-distance tolerance
        rigidity_tol: Phase-rigidity tolerance at the refined point
        builder: Optional callable for refinement
        refine_width: Final bracket width of the refinement

    Returns:
        ExceptionalPoint list (empty when none is found)
    """
    if len(sweep) < 2:
        return []
    phis = np.array([h.phi for h in sweep], dtype=float)
    if np.any(np.diff(phis) <= 0.0):
        raise SpecError("ep_scan needs a strictly increasing phase grid")

    eigs, rigidities = [], []
    for index, hamiltonian in enumerate(sweep):
        spectrum = spectra[index] if spectra is not None else None
        if spectrum is None:
            try:
                spectrum = biorthogonal_eig(hamiltonian)
            except DefectiveError:
                spectrum = None
        if spectrum is None:
            eigs.append(eigenvalues_only(hamiltonian))
            rigidities.append(np.zeros(hamiltonian.dim))
        else:
            eigs.append(spectrum.eigenvalues)
            rigidities.append(spectrum.phase_rigidity)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmbiguityWarning)
        tracking = track_branches(eigs)
    values = tracking.values
    tracked_rigidity = np.array([rigidities[k][tracking.order[k]] for k in range(len(sweep))])

    found: List[ExceptionalPoint] = []
    n_modes = values.shape[1]
    for k in range(len(sweep) - 1):
        diff0 = values[k][:, None] - values[k][None, :]
        diff1 = values[k + 1][:, None] - values[k + 1][None, :]
        sq0, sq1 = diff0 ** 2, diff1 ** 2
        for a in range(n_modes):
            for b in range(a + 1, n_modes):
                minimum, s = _interval_min(sq0[a, b], sq1[a, b])
                if minimum >= gap_tol ** 2:
                    continue

                phi_low, phi_high = phis[k], phis[k + 1]
                estimate = phi_low + s * (phi_high - phi_low)
                center_low = 0.5 * (values[k, a] + values[k, b])
                center_high = 0.5 * (values[k + 1, a] + values[k + 1, b])
                grid_rigidity = float(min(tracked_rigidity[k, [a, b]].min(), tracked_rigidity[k + 1, [a, b]].min()))

                if builder is not None:
                    estimate, distance = _refine(builder, phi_low, phi_high, center_low, center_high, refine_width)
                    s_est = (estimate - phi_low) / (phi_high - phi_low)
                    center = center_low + s_est * (center_high - center_low)
                    rigidity = _pair_rigidity(builder(estimate), center)
                    accepted = rigidity < rigidity_tol
                    refined = True
                else:
                    distance = float(np.sqrt(minimum))
                    rigidity = grid_rigidity
                    accepted = rigidity < COARSE_RIGIDITY_TOL
                    refined = False

                if accepted:
                    found.append(ExceptionalPoint(
                        phi_low=float(phi_low), phi_high=float(phi_high), phi_estimate=float(estimate),
                        mode_a=a, mode_b=b, min_distance=float(distance),
                        min_rigidity=float(rigidity), refined=refined,
                    ))

    logger.info(f"EP scan over {len(sweep)} points found {len(found)} exceptional point(s)")
    return found


def ep_mask(phis: Sequence[float], eps: Sequence[ExceptionalPoint], margin: float = 0.0) -> np.ndarray:
    """Boolean mask of grid points lying inside any EP interval."""
    phis = np.asarray(phis, dtype=float)
    mask = np.zeros(phis.shape, dtype=bool)
    for ep in eps:
        mask |= (phis >= ep.phi_low - margin) & (phis <= ep.phi_high + margin)
    return mask
