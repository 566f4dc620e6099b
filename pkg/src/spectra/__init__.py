"""Biorthogonal spectra, branch tracking and exceptional-point detection."""

from .biorthogonal import BiorthogonalSpectrum, biorthogonal_eig, eigenvalues_only
from .branches import BranchTracking, ExceptionalPoint, track_branches, ep_scan, ep_mask

__all__ = [
    'BiorthogonalSpectrum',
    'biorthogonal_eig',
    'eigenvalues_only',
    'BranchTracking',
    'ExceptionalPoint',
    'track_branches',
    'ep_scan',
    'ep_mask',
]
