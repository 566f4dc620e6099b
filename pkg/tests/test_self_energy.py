"""
Unit tests for reservoir self-energies and the effective Hamiltonian.
"""

import numpy as np
import pytest

from src.models.self_energy import (
    Branch,
    edge_green,
    effective_hamiltonian,
    self_energy_at,
    self_energy_matrix,
    self_energy_wideband,
    sns_reservoirs,
)
from src.models.tight_binding import DEFAULT_RING_HOPPINGS, ModelSpec, ReservoirSpec, build_system
from src.utils.errors import BandError, SpecError


class TestEdgeGreen:
    """Test cases for the semi-infinite chain edge Green's function."""

    @pytest.mark.parametrize("omega", [-1.5, -0.2, 0.0, 0.8])
    def test_dyson_fixed_point(self, omega):
        t, g = -1.0, 0.3
        green = edge_green(omega, t, g)
        assert green == pytest.approx(1.0 / (omega - g - t * t * green))

    def test_retarded_is_lossy_and_advanced_is_conjugate(self):
        retarded = edge_green(0.4, -1.0, 0.0, Branch.RETARDED)
        advanced = edge_green(0.4, -1.0, 0.0, Branch.ADVANCED)
        assert retarded.imag < 0.0
        assert advanced == pytest.approx(np.conj(retarded))

    def test_outside_band_rejected(self):
        with pytest.raises(BandError):
            edge_green(2.5, -1.0, 0.0)

    def test_positive_hopping_rejected(self):
        with pytest.raises(SpecError):
            edge_green(0.0, 1.0, 0.0)


class TestWideBand:
    """Test cases for Sigma(0)."""

    @pytest.fixture
    def reservoir(self):
        return ReservoirSpec(n_sites=101, t=-1.0, g=-1.1, attach_site=0, kappa=-0.4)

    def test_matches_frequency_resolved_value_at_zero(self, reservoir):
        wide = self_energy_wideband(reservoir, doubling=2)
        general = self_energy_at(reservoir, 0.0, doubling=2)
        assert wide.value_particle == pytest.approx(general.value_particle)
        assert wide.value_hole == pytest.approx(general.value_hole)

    def test_passive_and_particle_hole_signs(self, reservoir):
        block = self_energy_wideband(reservoir, doubling=2)
        assert block.value_particle.imag < 0.0
        assert block.value_hole.imag == pytest.approx(block.value_particle.imag)
        assert block.value_hole.real == pytest.approx(-block.value_particle.real)

    def test_closed_form(self, reservoir):
        block = self_energy_wideband(reservoir)
        expected = -(0.4 ** 2) * (-0.55 + 1j * np.sqrt(1.0 - 0.55 ** 2))
        assert block.value_particle == pytest.approx(expected)
        assert block.value_hole is None

    def test_zero_kappa_is_zero(self, reservoir):
        assert self_energy_wideband(reservoir.with_kappa(0.0)).value_particle == 0.0

    def test_bad_doubling(self, reservoir):
        with pytest.raises(SpecError):
            self_energy_wideband(reservoir, doubling=3)


class TestEffectiveHamiltonian:
    """Test cases for H_eff assembly."""

    @pytest.fixture
    def sns(self):
        return ModelSpec.sns(4, 4, 4, t=-1.0, delta=1.0, mu=-1.1, phi=1.0)

    def test_sns_reservoirs_at_both_ends(self, sns):
        left, right = sns_reservoirs(sns, n_sites=101, g=-1.1, kappa=-0.4)
        assert left.attach_site == 0
        assert right.attach_site == 11

    def test_sigma_only_on_attach_sites(self, sns):
        leads = sns_reservoirs(sns, g=-1.1)
        heff = effective_hamiltonian(sns, leads)
        difference = heff.matrix - build_system(sns)
        nonzero = {tuple(index) for index in np.argwhere(np.abs(difference) > 0.0)}
        assert nonzero == {(0, 0), (11, 11), (12, 12), (23, 23)}
        assert np.allclose(difference, self_energy_matrix(sns, leads))

    def test_eigenvalues_are_passive(self, sns):
        heff = effective_hamiltonian(sns, sns_reservoirs(sns, g=-1.1))
        assert np.all(np.linalg.eigvals(heff.matrix).imag <= 1e-12)

    def test_particle_hole_spectrum(self, sns):
        heff = effective_hamiltonian(sns, sns_reservoirs(sns, g=-1.1))
        values = np.linalg.eigvals(heff.matrix)
        for value in values:
            assert np.min(np.abs(values + np.conj(value))) < 1e-9

    def test_bookkeeping(self, sns):
        heff = effective_hamiltonian(sns, sns_reservoirs(sns))
        assert heff.doubling == 2
        assert heff.phi == 1.0
        assert heff.dim == 24
        assert len(heff.reservoirs) == 2

    def test_shared_attach_site_rejected(self):
        ring = ModelSpec.ring(DEFAULT_RING_HOPPINGS, mu=-1.0)
        lead = ReservoirSpec(10, -1.0, 0.0, 0, -1.0)
        with pytest.raises(SpecError):
            effective_hamiltonian(ring, [lead, lead])
