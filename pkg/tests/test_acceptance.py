"""
End-to-end reproductions of the reference parameter sets.

These run full 201-point sweeps with exact diagonalization of closed systems of
several hundred sites and take a while; deselect with ``-m "not slow"``.
"""

import numpy as np
import pytest

from src.models.self_energy import effective_hamiltonian
from src.models.tight_binding import current_operator
from src.observables.correlators import expect_quadratic
from src.observables.currents import (
    current_lr,
    isolated_current,
    operator_current_site_resolved,
    persistent_current_finiteT,
    persistent_current_trace,
)
from src.oracle.hermitian_oracle import exact_current
from src.response.susceptibility import im_susceptibility_nh
from src.spectra.biorthogonal import biorthogonal_eig, eigenvalues_only
from src.sweep.presets import load_presets
from src.sweep.run_config import parse_run_config
from src.sweep.runner import SweepRunner
from src.sweep.verification import Verifier
from src.utils.config_manager import ConfigManager

pytestmark = pytest.mark.slow

COMPARISON_METHODS = ['nh_trace', 'nh_operator', 'lr', 'rr', 'iso', 'exact', 'rr_sites']


def _preset_run(name, **overrides):
    document = dict(load_presets()[name])
    document.setdefault('name', name)
    document.update(overrides)
    return parse_run_config(document, dim_cap=2000)


@pytest.fixture(scope="module")
def config():
    return ConfigManager()


@pytest.fixture(scope="module")
def fig2a(config):
    return SweepRunner(config).compute(_preset_run("fig2a", methods=COMPARISON_METHODS))


@pytest.fixture(scope="module")
def fig2b(config):
    return SweepRunner(config).compute(_preset_run("fig2b", methods=COMPARISON_METHODS[:-1]))


class TestOracleAgreement:
    """NH currents against exact diagonalization with converged reservoirs."""

    @pytest.mark.parametrize("name", ["fig2a", "fig2b"])
    def test_nh_current_matches_exact(self, name, fig2a, fig2b):
        result = fig2a if name == "fig2a" else fig2b
        nh = result.curve.values['nh_trace']
        exact = result.curve.values['exact']
        assert np.max(np.abs(nh - exact)) <= 2e-2 * np.max(np.abs(exact))

    def test_operator_form_tracks_trace_form_away_from_eps(self, fig2a):
        smooth = fig2a.rigidities.min(axis=1) > 0.1
        trace = fig2a.curve.values['nh_trace'][smooth]
        operator = fig2a.curve.values['nh_operator'][smooth]
        assert np.max(np.abs(trace - operator)) < 1e-6


class TestExceptionalPoints:
    """Regularity of the NH current through EPs and the LR divergence."""

    def test_eps_are_found(self, fig2a):
        assert len(fig2a.exceptional_points) >= 1

    def test_trace_current_is_regular(self, fig2a):
        phis = fig2a.phis
        current = fig2a.curve.values['nh_trace']
        assert np.all(np.isfinite(current))
        second = np.abs(current[2:] - 2 * current[1:-1] + current[:-2])
        near = np.zeros(second.shape, dtype=bool)
        for ep in fig2a.exceptional_points:
            near |= np.abs(phis[1:-1] - ep.phi_estimate) <= 0.05
        if np.any(near) and np.any(~near):
            assert np.max(second[near]) <= 10 * np.max(second[~near])

    def test_lr_current_diverges_at_eps(self, config, fig2a):
        run = fig2a.config
        scale = np.max(np.abs(fig2a.curve.values['nh_trace']))
        peak = 0.0
        for ep in fig2a.exceptional_points:
            for offset in (-1e-3, -1e-4, 1e-4, 1e-3):
                phi = ep.phi_estimate + offset
                spectrum = biorthogonal_eig(effective_hamiltonian(run.model.with_phi(phi), run.reservoirs))
                peak = max(peak, abs(current_lr(spectrum, current_operator(run.model.with_phi(phi)))))
        assert peak > 10 * scale


class TestHermitianLimit:
    """Every method recovers the isolated current as kappa -> 0."""

    @pytest.mark.parametrize("name", ["fig2a", "fig2b"])
    def test_weak_coupling(self, config, name):
        # half-step offset keeps the grid off phi = pi
        run = _preset_run(name, methods=['nh_trace', 'nh_operator', 'lr', 'rr', 'iso'],
                          phi_grid={'start': 0.0314, 'stop': 6.2518, 'count': 100}).with_kappa(-1e-6)
        result = SweepRunner(config).compute(run)
        reference = result.curve.values['iso']
        for method in ('nh_trace', 'nh_operator', 'lr', 'rr'):
            values = np.real(result.curve.values[method])
            assert np.max(np.abs(values - reference)) <= 1e-5, method

    def test_decoupled_reservoir(self):
        run = _preset_run("fig2b").with_kappa(0.0)
        for phi in (0.5, 2.0):
            iso = isolated_current(run.model, phi)
            assert exact_current(run.model, run.reservoirs, phi) == pytest.approx(iso, abs=1e-10)
            spectrum = biorthogonal_eig(effective_hamiltonian(run.model.with_phi(phi), run.reservoirs))
            operator = expect_quadratic(spectrum, current_operator(run.model.with_phi(phi)))
            assert operator == pytest.approx(iso, abs=1e-10)


class TestFiniteTemperature:
    """Log-gamma current against zero temperature and the thermal oracle."""

    @pytest.fixture(scope="class")
    def sns(self):
        return _preset_run("fig3a")

    def test_cold_limit(self, sns):
        for phi in (0.4, 1.7, 2.9):
            cold = persistent_current_finiteT(sns.model, sns.reservoirs, 1e4, phi)
            assert cold == pytest.approx(persistent_current_trace(sns.model, sns.reservoirs, phi), abs=1e-4)

    @pytest.mark.parametrize("beta", [10.0, 5.0, 2.0])
    def test_matches_thermal_oracle(self, sns, beta):
        phis = np.linspace(0.1, 6.1, 25)
        nh = np.array([persistent_current_finiteT(sns.model, sns.reservoirs, beta, phi) for phi in phis])
        exact = np.array([exact_current(sns.model, sns.reservoirs, phi, beta) for phi in phis])
        assert np.max(np.abs(nh - exact)) <= 2e-2 * np.max(np.abs(exact))

    def test_current_decreases_with_temperature(self, sns):
        phi = np.pi / 2
        amplitudes = [abs(persistent_current_finiteT(sns.model, sns.reservoirs, beta, phi))
                      for beta in (10.0, 5.0, 2.0)]
        assert amplitudes[0] > amplitudes[1] > amplitudes[2]


class TestStructure:
    """Particle-hole pairing, conservation and Hellmann-Feynman on the SNS sweep."""

    def test_particle_hole_pairing_on_grid(self, fig2a):
        run = fig2a.config
        for phi in fig2a.phis:
            values = eigenvalues_only(effective_hamiltonian(run.model.with_phi(phi), run.reservoirs))
            mirrored = -values.conj()
            assert max(np.min(np.abs(mirrored - v)) for v in values) < 1e-9

    def test_operator_current_is_conserved_but_rr_is_not(self, fig2a):
        run = fig2a.config
        for point in fig2a.points[::10]:
            sites = operator_current_site_resolved(point.spectrum, run.model.with_phi(point.phi))
            assert np.ptp(sites) < 1e-10
        assert np.max(np.ptp(fig2a.site_currents, axis=1)) > 1e-3

    def test_hellmann_feynman(self, config, fig2a):
        assert Verifier(config).check_hellmann_feynman(fig2a.config).passed


class TestCouplingStrength:
    """Current amplitude as a function of the tunnel amplitude."""

    @pytest.fixture(scope="class")
    def sns_scan(self, config):
        return SweepRunner(config).compute(_preset_run("figS3", methods=['nh_trace', 'iso', 'exact']))

    def test_sns_amplitude_peaks_inside_the_scan(self, sns_scan):
        amplitudes = sns_scan.amplitudes['nh_trace']
        peak = int(np.argmax(amplitudes))
        assert 0 < peak < len(amplitudes) - 1
        assert np.all(np.diff(amplitudes[:peak + 1]) > 0.0)
        assert np.all(np.diff(amplitudes[peak:]) < 0.0)
        assert -1.4 <= sns_scan.config.kappa_scan[peak] <= -0.6

    def test_coupling_enhances_the_sns_current(self, sns_scan):
        isolated = np.max(np.abs(sns_scan.curve.values['iso']))
        assert np.all(sns_scan.amplitudes['nh_trace'] > isolated)

    def test_sns_amplitude_matches_exact_up_to_kappa_t(self, sns_scan):
        kappas = np.array(sns_scan.config.kappa_scan)
        nh = sns_scan.amplitudes['nh_trace']
        exact = sns_scan.amplitudes['exact']
        weak = np.abs(kappas) <= 1.0 + 1e-12
        assert np.all(np.abs(nh - exact)[weak] <= 5e-2 * exact[weak])

    def test_ring_amplitude_decreases_and_matches_exact(self, config):
        kappas = [-0.1 * k for k in range(1, 11)]
        run = _preset_run("fig2b", methods=['nh_trace', 'exact'], kappa_scan=kappas,
                          phi_grid={'start': 0.0, 'stop': 6.283185307179586, 'count': 51})
        amplitudes = SweepRunner(config).compute(run).amplitudes
        assert np.all(np.diff(amplitudes['nh_trace']) < 0.0)
        assert np.all(np.abs(amplitudes['nh_trace'] - amplitudes['exact']) <= 2e-2 * amplitudes['exact'])


def _transition_lines(spectrum):
    levels = spectrum.eigenvalues.real
    return np.abs(levels[None, levels > 0] - levels[levels <= 0, None]).ravel()


class TestSusceptibility:
    """Peaks of the NH susceptibility sit on level transitions and match the Kubo map."""

    @pytest.fixture(scope="class", params=[("fig4a", 201), ("fig4b", 401)], ids=["sns", "ring"])
    def maps(self, request, config):
        name, oracle_sites = request.param
        run = _preset_run(name, methods=['susceptibility_nh', 'susceptibility_exact'], eta=0.03,
                          oracle_reservoir_sites=oracle_sites,
                          phi_grid={'start': 0.1, 'stop': 6.1, 'count': 21})
        return SweepRunner(config).compute(run)

    def test_peaks_on_transition_lines(self):
        run = _preset_run("fig4a")
        omegas = run.omega_grid.values()
        spacing = run.omega_grid.spacing
        for phi in (0.8, 1.6, 2.4):
            system = run.model.with_phi(phi)
            spectrum = biorthogonal_eig(effective_hamiltonian(system, run.reservoirs))
            values = im_susceptibility_nh(spectrum, system, omegas)
            assert np.allclose(values, -values[::-1], atol=1e-8)

            positive = omegas > 0
            peak = omegas[positive][np.argmax(np.abs(values[positive]))]
            assert np.min(np.abs(_transition_lines(spectrum) - peak)) <= 2 * spacing

    def test_broadened_map_matches_exact_map(self, maps):
        assert maps.map_deviation <= 0.1
        exact = maps.susceptibilities['exact']
        broadened = maps.susceptibilities['nh_broadened']
        assert np.max(np.abs(broadened.normalized() - exact.normalized())) == pytest.approx(maps.map_deviation)

    def test_exact_peaks_on_nh_transition_lines(self, maps):
        run = maps.config
        exact = maps.susceptibilities['exact']
        omegas = exact.omega_grid
        positive = omegas > 0
        tolerance = 2 * run.omega_grid.spacing + exact.eta
        for point, row in zip(maps.points, exact.values):
            peak = omegas[positive][np.argmax(np.abs(row[positive]))]
            assert np.min(np.abs(_transition_lines(point.spectrum) - peak)) <= tolerance, point.phi
