"""
Unit tests for run configuration parsing and the built-in presets.
"""

import pytest

from src.models.tight_binding import ModelKind
from src.sweep.presets import get_preset, load_presets, preset_names
from src.sweep.run_config import Method, load_run_config, parse_run_config
from src.utils.errors import ConfigValidationError

RING_YAML = """\
name: small-ring
model:
  kind: ring
  mu: -1.0
  hoppings: [-1.0, -0.9, -1.1, -1.0]
reservoirs:
  - n_sites: 20
    g: 0.0
    attach_site: 0
    kappa: {kappa}
phi_grid:
  start: 0.0
  stop: 3.0
  count: 4
methods: [nh_trace, exact]
"""


@pytest.fixture
def ring_document():
    return {
        'model': {'kind': 'ring', 'mu': -1.0, 'hoppings': [-1.0, -0.9, -1.1, -1.0]},
        'reservoirs': [{'n_sites': 20, 'attach_site': 0, 'kappa': -1.0}],
        'phi_grid': {'start': 0.0, 'stop': 3.0, 'count': 4},
        'methods': ['nh_trace', 'exact'],
    }


@pytest.fixture
def sns_document():
    return {
        'model': {'kind': 'sns', 'n_left': 4, 'n_middle': 4, 'n_right': 4, 'mu': -1.1},
        'sns_reservoirs': {'n_sites': 101, 'g': -1.1, 'kappa': -0.4},
        'phi_grid': {'start': 0.0, 'stop': 6.0, 'count': 3},
        'methods': ['nh_trace'],
    }


class TestParseRunConfig:
    """Test cases for parse_run_config."""

    def test_ring_document(self, ring_document):
        run = parse_run_config(ring_document)
        assert run.model.kind == ModelKind.RING
        assert run.methods == (Method.NH_TRACE, Method.EXACT)
        assert list(run.phi_grid.values()) == [0.0, 1.0, 2.0, 3.0]
        assert run.phi_grid.spacing == 1.0
        assert run.reservoirs[0].t == -1.0
        assert run.total_dimension == 24
        assert run.name == "custom"

    def test_sns_reservoirs_expand_to_both_ends(self, sns_document):
        run = parse_run_config(sns_document)
        assert [r.attach_site for r in run.reservoirs] == [0, 11]
        assert run.total_dimension == 428

    def test_disordered_ring_from_seed(self, ring_document):
        ring_document['model'] = {'kind': 'ring', 'n_sites': 8}
        ring_document['seed'] = 5
        first = parse_run_config(ring_document)
        second = parse_run_config(ring_document)
        assert first.model.ring_hoppings == second.model.ring_hoppings
        assert len(set(first.model.ring_hoppings)) > 1

    def test_with_kappa_replaces_every_reservoir(self, sns_document):
        run = parse_run_config(sns_document).with_kappa(-0.8)
        assert all(r.kappa == -0.8 for r in run.reservoirs)

    def test_to_dict_echo(self, ring_document):
        echo = parse_run_config(ring_document).to_dict()
        assert echo['methods'] == ['nh_trace', 'exact']
        assert echo['phi_grid'] == {'start': 0.0, 'stop': 3.0, 'count': 4}
        assert echo['reservoirs'][0]['kappa'] == -1.0

    def test_positive_kappa_names_the_field(self, ring_document):
        ring_document['reservoirs'][0]['kappa'] = 0.3
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "reservoirs/0/kappa"
        assert info.value.exit_code == 1

    def test_unknown_method(self, ring_document):
        ring_document['methods'] = ['nh_trace', 'magic']
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "methods/1"

    def test_unknown_field(self, ring_document):
        ring_document['colour'] = 'blue'
        with pytest.raises(ConfigValidationError):
            parse_run_config(ring_document)

    def test_single_point_grid_rejected(self, ring_document):
        ring_document['phi_grid']['count'] = 1
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "phi_grid/count"

    def test_reversed_grid_rejected(self, ring_document):
        ring_document['phi_grid'] = {'start': 2.0, 'stop': 1.0, 'count': 3}
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "phi_grid/stop"

    def test_susceptibility_needs_omega_grid(self, ring_document):
        ring_document['methods'] = ['susceptibility_nh']
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "methods"

    def test_susceptibility_is_zero_temperature_only(self, ring_document):
        ring_document['methods'] = ['susceptibility_nh']
        ring_document['omega_grid'] = {'start': 0.0, 'stop': 2.0, 'count': 5}
        ring_document['beta'] = 10.0
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "beta"

    def test_free_energy_needs_beta(self, ring_document):
        ring_document['methods'] = ['exact_free_energy']
        with pytest.raises(ConfigValidationError):
            parse_run_config(ring_document)

    def test_current_bond_must_be_normal(self, sns_document):
        sns_document['current_bond'] = 1
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(sns_document)
        assert info.value.field == "current_bond"

    def test_attach_site_outside_device(self, ring_document):
        ring_document['reservoirs'][0]['attach_site'] = 9
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "reservoirs/0"

    def test_kappa_scan_needs_reservoirs(self, ring_document):
        del ring_document['reservoirs']
        ring_document['kappa_scan'] = [-0.5]
        with pytest.raises(ConfigValidationError):
            parse_run_config(ring_document)

    def test_dimension_cap_applies_to_exact_methods(self, ring_document):
        with pytest.raises(ConfigValidationError):
            parse_run_config(ring_document, dim_cap=10)
        ring_document['methods'] = ['nh_trace']
        assert parse_run_config(ring_document, dim_cap=10).total_dimension == 24

    def test_oracle_reservoir_sites_resize_only_the_exact_reference(self, ring_document):
        ring_document['oracle_reservoir_sites'] = 50
        run = parse_run_config(ring_document)
        assert run.reservoirs[0].n_sites == 20
        assert run.oracle_reservoirs[0].n_sites == 50
        assert run.oracle_reservoirs[0].kappa == run.reservoirs[0].kappa
        assert run.oracle_dimension == 54
        assert run.to_dict()['oracle_reservoir_sites'] == 50
        assert run.with_kappa(-0.3).oracle_reservoirs[0].kappa == -0.3

    def test_dimension_cap_uses_the_oracle_reservoirs(self, ring_document):
        ring_document['oracle_reservoir_sites'] = 50
        with pytest.raises(ConfigValidationError):
            parse_run_config(ring_document, dim_cap=40)

    def test_oracle_reservoir_sites_need_reservoirs(self, ring_document):
        del ring_document['reservoirs']
        ring_document['oracle_reservoir_sites'] = 50
        with pytest.raises(ConfigValidationError) as info:
            parse_run_config(ring_document)
        assert info.value.field == "oracle_reservoir_sites"

    def test_non_mapping_rejected(self):
        with pytest.raises(ConfigValidationError):
            parse_run_config(['not', 'a', 'mapping'])


class TestLoadRunConfig:
    """Test cases for reading configurations from disk."""

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "ring.yaml"
        path.write_text(RING_YAML.format(kappa=-1.0))
        run = load_run_config(str(path))
        assert run.name == "small-ring"
        assert run.reservoirs[0].kappa == -1.0

    def test_error_carries_source_line(self, tmp_path):
        path = tmp_path / "ring.yaml"
        path.write_text(RING_YAML.format(kappa=0.5))
        with pytest.raises(ConfigValidationError) as info:
            load_run_config(str(path))
        assert info.value.field == "reservoirs/0/kappa"
        assert info.value.source == f"{path}:10"
        assert "reservoirs/0/kappa" in str(info.value)

    def test_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("model:\n  kind: ring\nphi_grid: [1, 2\n")
        with pytest.raises(ConfigValidationError) as info:
            load_run_config(str(path))
        assert info.value.source.startswith(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            load_run_config(str(tmp_path / "absent.yaml"))


class TestPresets:
    """Test cases for the built-in presets."""

    def test_all_presets_listed(self):
        assert preset_names() == ["fig1c", "fig1d", "fig2a", "fig2b", "fig3a", "fig3b",
                                  "fig4a", "fig4b", "figS1", "figS2", "figS3", "figS4"]

    @pytest.mark.parametrize("name", list(load_presets()))
    def test_every_preset_is_valid(self, name):
        run = get_preset(name, dim_cap=2000)
        assert run.name == name
        assert run.phi_grid.count >= 51

    def test_fig2a_parameters(self):
        run = get_preset("fig2a")
        assert run.model.kind == ModelKind.SNS
        assert run.model.mu == -1.1
        assert [r.kappa for r in run.reservoirs] == [-0.4, -0.4]
        assert run.total_dimension == 428
        assert run.phi_grid.count == 201

    def test_fig2b_parameters(self):
        run = get_preset("fig2b")
        assert run.model.kind == ModelKind.RING
        assert len(run.model.ring_hoppings) == 6
        assert run.reservoirs[0].kappa == -1.0
        assert run.total_dimension == 107
        assert run.oracle_dimension == 407

    def test_figS3_scan_brackets_the_amplitude_peak(self):
        run = get_preset("figS3")
        assert min(run.kappa_scan) == -2.0
        assert max(run.kappa_scan) == -0.2
        assert run.oracle_dimension == 828

    def test_susceptibility_presets(self):
        assert get_preset("fig4a").omega_grid.count == 301
        assert get_preset("figS4").eta == 0.03

    def test_unknown_preset(self):
        with pytest.raises(ConfigValidationError) as info:
            get_preset("fig9z")
        assert info.value.field == "preset"
