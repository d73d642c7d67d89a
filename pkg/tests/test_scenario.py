import math
import os

import pytest

from pathfollow.config import get_scenarios_dir
from pathfollow.errors import ConfigParseError, ConfigValidationError
from pathfollow.scenario import load_scenario, resolve_config_path, scenario_from_dict

BUNDLED = ['paper_ellipse_wind', 'paper_ellipse_calm', 'paper_ellipse_gusts', 'ellipse_tailwind',
           'line_offset', 'circle_calm']


@pytest.mark.parametrize('name', BUNDLED)
def test_bundled_scenarios_load(name):
    scenario = load_scenario(name)
    assert scenario.name == name
    assert scenario.source_path == os.path.join(get_scenarios_dir(), f'{name}.yaml')


def test_wind_scenario_values():
    scenario = load_scenario('paper_ellipse_wind')
    sim = scenario.sim
    assert scenario.curve_kind == 'ellipse'
    assert sim.airspeed == 11.0
    assert (sim.gains.k_e, sim.gains.k_d) == (0.4, 1.0)
    assert sim.wind.sup_norm() == 5.0
    assert sim.initial_state.psi == pytest.approx(math.radians(145.0))
    assert not sim.align_initial_yaw
    assert sim.bank_limit == pytest.approx(math.radians(45.0))
    assert sim.steps() == 72000
    assert scenario.settle_tolerance == 0.05
    assert scenario.field_bbox == (-150.0, 150.0, -150.0, 150.0)
    assert sim.curve.phi(sim.initial_state.p) == pytest.approx(3.0, rel=1e-9)


def test_line_uses_metric_tolerance():
    assert load_scenario('line_offset').settle_tolerance == 1.0


def test_resolve_config_path(tmp_path):
    assert resolve_config_path('circle_calm').endswith(os.path.join('scenarios', 'circle_calm.yaml'))
    assert resolve_config_path('no_such_scenario') == 'no_such_scenario'
    path = tmp_path / 'circle_calm'
    path.write_text('name: local\n', encoding='utf-8')
    assert resolve_config_path(str(path)) == str(path)


def test_aligned_yaw_keyword(ellipse_config):
    scenario = scenario_from_dict(ellipse_config)
    assert scenario.sim.align_initial_yaw
    ellipse_config['initial_yaw_deg'] = 90
    scenario = scenario_from_dict(ellipse_config)
    assert not scenario.sim.align_initial_yaw
    assert scenario.sim.initial_state.psi == pytest.approx(math.pi / 2)


def test_defaults(ellipse_config):
    for key in ('integration_rate_hz', 'controller_rate_hz', 'log_rate_hz'):
        del ellipse_config[key]
    scenario = scenario_from_dict(ellipse_config)
    assert scenario.sim.dt == pytest.approx(1 / 600)
    assert scenario.sim.controller_rate_hz == 60.0
    assert scenario.sim.log_rate_hz is None
    assert scenario.sim.wind.sup_norm() == 0.0
    assert scenario.field_resolution == 41


@pytest.mark.parametrize('changes, message', [
    ({'k_e': 0.0}, 'k_e'),
    ({'airspeed_mps': -11.0}, 'airspeed_mps'),
    ({'wind_x_mps': -11.0}, 'ветер'),
    ({'initial_yaw_deg': 'north'}, 'initial_yaw_deg'),
    ({'curve': 'spiral'}, 'spiral'),
    ({'semi_axis_a_m': None}, 'semi_axis_a_m'),
    ({'field_bbox': [0.0, 1.0]}, 'field_bbox'),
    ({'wind_kind': 'storm'}, 'storm'),
    ({'direction': 'cw'}, 'direction'),
    ({'direction': 1.5}, 'direction'),
    ({'direction': True}, 'direction'),
    ({'log_rate_hz': 'fast'}, 'log_rate_hz'),
    ({'log_rate_hz': 0}, 'log_rate_hz'),
    ({'field_resolution': 'x'}, 'field_resolution'),
    ({'field_resolution': 1}, 'field_resolution'),
    ({'field_bbox': [0.0, 'a', 0.0, 1.0]}, 'field_bbox'),
    ({'check_wind_margin': 'false'}, 'check_wind_margin'),
    ({'airspeed_amplitude_mps': 'big'}, 'airspeed_amplitude_mps'),
    ({'airspeed_amplitude_mps': 2.0, 'airspeed_period_s': 0}, 'airspeed_period_s'),
])
def test_invalid_values_rejected(ellipse_config, changes, message):
    ellipse_config.update(changes)
    with pytest.raises(ConfigValidationError, match=message):
        scenario_from_dict(ellipse_config)


def test_missing_required_key(ellipse_config):
    del ellipse_config['duration_s']
    with pytest.raises(ConfigValidationError, match='duration_s'):
        scenario_from_dict(ellipse_config)


def test_load_from_file(ellipse_config, write_scenario):
    path = write_scenario(ellipse_config)
    scenario = load_scenario(path)
    assert scenario.name == 'ellipse_test'
    assert scenario.source_path == path
    assert scenario.output_dir('out') == os.path.join('out', 'ellipse_test')


def test_load_broken_file(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text('name: [broken\n', encoding='utf-8')
    with pytest.raises(ConfigParseError):
        load_scenario(str(path))


def test_check_wind_margin_flag(ellipse_config):
    ellipse_config.update({'wind_x_mps': -11.0, 'check_wind_margin': False})
    assert not scenario_from_dict(ellipse_config).sim.check_wind_margin


def test_airspeed_schedule_keys(ellipse_config):
    ellipse_config.update({'airspeed_amplitude_mps': 2.0, 'airspeed_period_s': 20.0})
    sim = scenario_from_dict(ellipse_config).sim
    assert sim.airspeed_at(5.0) == pytest.approx(13.0)
    assert sim.min_airspeed() == pytest.approx(9.0)


def test_wind_margin_uses_minimum_airspeed(ellipse_config):
    ellipse_config.update({'wind_x_mps': -9.5, 'airspeed_amplitude_mps': 2.0, 'airspeed_period_s': 20.0})
    with pytest.raises(ConfigValidationError, match='min s = 9.000'):
        scenario_from_dict(ellipse_config)
