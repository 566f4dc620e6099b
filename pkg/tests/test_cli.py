"""
Tests for the command-line interface.
"""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from src.main import cli

RUN_YAML = """\
name: cli-ring
model:
  kind: ring
  mu: -1.0
  hoppings: [-1.0, -0.9, -1.1, -1.0]
reservoirs:
  - n_sites: 10
    attach_site: 0
    kappa: {kappa}
phi_grid:
  start: 0.5
  stop: 2.5
  count: 2
methods: [nh_trace, lr, exact]
"""

SETTINGS_YAML = """\
sweep:
  max_workers: 2
  output_dir: {output}
logging:
  level: WARNING
  use_rich: false
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def settings(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text(SETTINGS_YAML.format(output=tmp_path / "default-output"))
    return str(path)


@pytest.fixture
def run_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(RUN_YAML.format(kappa=-0.8))
    return str(path)


class TestPresetList:
    """Test cases for the preset-list command."""

    def test_lists_presets(self, runner):
        result = runner.invoke(cli, ['preset-list'])
        assert result.exit_code == 0
        assert 'fig2a' in result.output
        assert 'figS4' in result.output


class TestSweepCommand:
    """Test cases for the sweep command."""

    def test_minimal_grid(self, runner, settings, run_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(cli, ['--settings', settings, 'sweep', '--config', run_file,
                                     '--output-dir', str(out), '--workers', '1'])
        assert result.exit_code == 0, result.output
        currents = pd.read_csv(out / "currents.csv")
        assert len(currents) == 2
        assert list(currents.columns) == ['phi', 'nh_trace', 'lr_re', 'lr_im', 'exact']
        assert (out / "run_manifest.json").exists()

    def test_default_output_dir_uses_run_name(self, runner, settings, run_file, tmp_path):
        result = runner.invoke(cli, ['--settings', settings, 'sweep', '--config', run_file])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "default-output" / "cli-ring" / "currents.csv").exists()

    def test_delta_phi_recorded(self, runner, settings, run_file, tmp_path):
        out = tmp_path / "out"
        runner.invoke(cli, ['--settings', settings, 'sweep', '--config', run_file,
                            '--output-dir', str(out), '--delta-phi', '2e-4'])
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest['numerics']['delta_phi'] == 2e-4

    def test_positive_kappa_is_a_validation_error(self, runner, settings, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(RUN_YAML.format(kappa=0.4))
        result = runner.invoke(cli, ['--settings', settings, 'sweep', '--config', str(path)])
        assert result.exit_code == 1
        assert 'reservoirs/0/kappa' in result.output

    def test_needs_exactly_one_source(self, runner, settings, run_file):
        assert runner.invoke(cli, ['--settings', settings, 'sweep']).exit_code == 1
        both = runner.invoke(cli, ['--settings', settings, 'sweep', '--config', run_file, '--preset', 'fig2a'])
        assert both.exit_code == 1

    def test_unknown_preset(self, runner, settings):
        result = runner.invoke(cli, ['--settings', settings, 'sweep', '--preset', 'nope'])
        assert result.exit_code == 1


class TestVerifyCommand:
    """Test cases for the verify command."""

    def test_report_written(self, runner, settings, run_file, tmp_path):
        out = tmp_path / "verify"
        result = runner.invoke(cli, ['--settings', settings, 'verify', '--config', run_file,
                                     '--output-dir', str(out), '--tol', 'nh_vs_exact=10'])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "verify_report.json").read_text())
        assert report['passed'] is True
        thresholds = {check['name']: check['threshold'] for check in report['checks']}
        assert thresholds['nh_vs_exact'] == 10.0
        assert thresholds['hermitian_limit'] == 1e-5

    def test_failed_check_exit_code(self, runner, settings, run_file, tmp_path):
        result = runner.invoke(cli, ['--settings', settings, 'verify', '--config', run_file,
                                     '--output-dir', str(tmp_path / "verify"), '--tol', 'nh_vs_exact=1e-12'])
        assert result.exit_code == 3
        report = json.loads((tmp_path / "verify" / "verify_report.json").read_text())
        assert report['passed'] is False

    def test_malformed_tolerance(self, runner, settings, run_file):
        result = runner.invoke(cli, ['--settings', settings, 'verify', '--config', run_file, '--tol', 'nonsense'])
        assert result.exit_code == 1
