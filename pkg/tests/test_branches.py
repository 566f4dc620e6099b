"""
Unit tests for branch tracking and exceptional-point detection.
"""

import warnings

import numpy as np
import pytest

from src.models.self_energy import EffectiveHamiltonian
from src.models.tight_binding import ModelSpec
from src.spectra.branches import ExceptionalPoint, ep_mask, ep_scan, track_branches
from src.utils.errors import AmbiguityWarning, SpecError


def _two_level(phi: float, gamma: float = 1.0) -> EffectiveHamiltonian:
    """[[-i gamma, phi - 1], [phi - 1, 0]] has an EP at phi = 1 - gamma / 2."""
    coupling = phi - 1.0
    matrix = np.array([[-1j * gamma, coupling], [coupling, 0.0]], dtype=complex)
    return EffectiveHamiltonian(matrix=matrix, system=ModelSpec.uniform_ring(3, phi=phi))


class TestTrackBranches:
    """Test cases for track_branches."""

    def test_crossing_lines_keep_identity(self):
        phis = np.linspace(0.0, 1.0, 11)
        rising, falling = phis, 1.0 - phis
        lists = [np.sort(np.array([a, b])) for a, b in zip(rising, falling)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AmbiguityWarning)
            tracking = track_branches(lists)
        first = tracking.values[:, 0]
        second = tracking.values[:, 1]
        assert np.allclose(first.real, falling) or np.allclose(first.real, rising)
        assert np.allclose(np.abs(np.diff(first.real)), 0.1)
        assert np.allclose(np.abs(np.diff(second.real)), 0.1)

    def test_order_maps_back_to_input(self):
        lists = [np.array([1.0, 2.0, 3.0]), np.array([3.1, 1.1, 2.1])]
        tracking = track_branches(lists)
        assert np.allclose(tracking.values[1], [1.1, 2.1, 3.1])
        assert list(tracking.order[1]) == [1, 2, 0]

    def test_exact_tie_warns(self):
        lists = [np.array([0.0, 1.0]), np.array([0.5, 0.5])]
        with pytest.warns(AmbiguityWarning):
            tracking = track_branches(lists)
        assert tracking.ambiguities[0][0] == 1

    def test_unequal_lengths_rejected(self):
        with pytest.raises(SpecError):
            track_branches([np.array([0.0, 1.0]), np.array([0.0])])

    def test_empty_input(self):
        assert track_branches([]).values.shape == (0, 0)


class TestEpScan:
    """Test cases for ep_scan on a two-level model with a known EP."""

    @pytest.fixture
    def sweep(self):
        return [_two_level(phi) for phi in np.linspace(0.0, 1.0, 20)]

    def test_refined_ep_located(self, sweep):
        eps = ep_scan(sweep, builder=_two_level)
        assert len(eps) == 1
        ep = eps[0]
        assert ep.refined
        assert ep.phi_low <= 0.5 <= ep.phi_high
        assert ep.phi_estimate == pytest.approx(0.5, abs=1e-5)
        assert ep.min_rigidity < 0.1

    def test_coarse_scan_without_builder(self, sweep):
        eps = ep_scan(sweep)
        assert len(eps) == 1
        assert not eps[0].refined
        assert eps[0].contains(0.5)

    def test_no_ep_without_coalescence(self):
        sweep = [_two_level(phi, gamma=0.2) for phi in np.linspace(0.0, 0.5, 11)]
        assert ep_scan(sweep, builder=lambda p: _two_level(p, gamma=0.2)) == []

    def test_unsorted_grid_rejected(self, sweep):
        with pytest.raises(SpecError):
            ep_scan(list(reversed(sweep)))

    def test_single_point_returns_nothing(self, sweep):
        assert ep_scan(sweep[:1]) == []


class TestEpMask:
    """Test cases for ep_mask."""

    def test_mask_covers_bracket(self):
        ep = ExceptionalPoint(0.4, 0.5, 0.45, 0, 1, 0.0, 0.0, True)
        mask = ep_mask(np.linspace(0.0, 1.0, 11), [ep])
        assert list(np.flatnonzero(mask)) == [4, 5]

    def test_margin_widens(self):
        ep = ExceptionalPoint(0.4, 0.5, 0.45, 0, 1, 0.0, 0.0, True)
        mask = ep_mask(np.linspace(0.0, 1.0, 11), [ep], margin=0.15)
        assert list(np.flatnonzero(mask)) == [3, 4, 5, 6]
