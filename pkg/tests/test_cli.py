import os

import pandas as pd
import pytest

from pathfollow.cli import build_parser, cmd_field, cmd_run, cmd_tune, cmd_validate, main
from pathfollow.config import get_scenarios_dir
from pathfollow.constants import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_PARSE,
    EXIT_CONFIG_VALIDATION,
    EXIT_OK,
    EXIT_SINGULARITY,
    FIELD_COLUMNS,
    OUTPUT_ROOT_ENV,
    TRAJECTORY_COLUMNS,
)
from pathfollow.curve import ImplicitCurve, make_circle, register_curve
from pathfollow.geometry import Vec2


def test_run_writes_outputs(ellipse_config, write_scenario, tmp_path):
    out = tmp_path / 'out'
    assert cmd_run([write_scenario(ellipse_config)], str(out)) == EXIT_OK
    scenario_dir = out / 'ellipse_test'
    trajectory = pd.read_csv(scenario_dir / 'trajectory.csv')
    assert list(trajectory.columns) == TRAJECTORY_COLUMNS
    assert len(trajectory) == 121
    report = (scenario_dir / 'report.txt').read_text(encoding='utf-8')
    assert report.startswith('scenario: ellipse_test\n')
    assert 'settle_time:' in report
    row = pd.read_csv(scenario_dir / 'report.csv')
    assert row['scenario'][0] == 'ellipse_test'
    assert not (out / 'summary.csv').exists()


def test_run_is_deterministic(ellipse_config, write_scenario, tmp_path):
    path = write_scenario(ellipse_config)
    assert cmd_run([path], str(tmp_path / 'a')) == EXIT_OK
    assert cmd_run([path], str(tmp_path / 'b')) == EXIT_OK
    first = (tmp_path / 'a' / 'ellipse_test' / 'trajectory.csv').read_bytes()
    second = (tmp_path / 'b' / 'ellipse_test' / 'trajectory.csv').read_bytes()
    assert first == second


def test_run_several_scenarios_writes_summary(ellipse_config, write_scenario, tmp_path):
    first = write_scenario(ellipse_config)
    ellipse_config.update({'name': 'ellipse_wind_test', 'wind_x_mps': -5.0})
    second = write_scenario(ellipse_config)
    out = tmp_path / 'out'
    assert cmd_run([first, second], str(out), workers=2) == EXIT_OK
    summary = pd.read_csv(out / 'summary.csv')
    assert list(summary['scenario']) == ['ellipse_test', 'ellipse_wind_test']


def test_run_rejects_duplicate_names(ellipse_config, write_scenario, tmp_path):
    path = write_scenario(ellipse_config)
    assert cmd_run([path, path], str(tmp_path / 'out')) == EXIT_CONFIG_VALIDATION


def test_malformed_yaml_exits_before_any_output(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text('name: [broken\n', encoding='utf-8')
    out = tmp_path / 'out'
    assert cmd_run([str(path)], str(out)) == EXIT_CONFIG_PARSE
    assert not out.exists()


@pytest.mark.parametrize('changes', [
    {'wind_x_mps': -11.0},
    {'k_e': 0.0},
    {'direction': 'cw'},
    {'log_rate_hz': 'fast'},
    {'field_resolution': 'x'},
    {'check_wind_margin': 'false'},
])
def test_invalid_scenario_exits_with_validation_code(ellipse_config, write_scenario, tmp_path, changes):
    ellipse_config.update(changes)
    out = tmp_path / 'out'
    assert cmd_run([write_scenario(ellipse_config)], str(out)) == EXIT_CONFIG_VALIDATION
    assert not out.exists()


def test_invalid_second_scenario_stops_whole_run(ellipse_config, write_scenario, tmp_path):
    good = write_scenario(ellipse_config)
    ellipse_config.update({'name': 'bad', 'k_d': -1.0})
    bad = write_scenario(ellipse_config)
    out = tmp_path / 'out'
    assert cmd_run([good, bad], str(out)) == EXIT_CONFIG_VALIDATION
    assert not out.exists()


def test_singularity_exit_code(ellipse_config, write_scenario, tmp_path):
    ellipse_config.update({'initial_x_m': 0.0, 'initial_y_m': 0.0, 'initial_yaw_deg': 0.0})
    out = tmp_path / 'out'
    assert cmd_run([write_scenario(ellipse_config)], str(out)) == EXIT_SINGULARITY
    assert (out / 'ellipse_test' / 'trajectory.csv').exists()


def test_output_root_from_environment(ellipse_config, write_scenario, tmp_path, monkeypatch):
    env_root = tmp_path / 'env_root'
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(env_root))
    path = write_scenario(ellipse_config)
    assert cmd_run([path]) == EXIT_OK
    assert (env_root / 'ellipse_test' / 'trajectory.csv').exists()

    explicit = tmp_path / 'explicit'
    assert cmd_run([path], str(explicit)) == EXIT_OK
    assert (explicit / 'ellipse_test' / 'trajectory.csv').exists()


def test_run_with_dxf(ellipse_config, write_scenario, tmp_path):
    out = tmp_path / 'out'
    assert cmd_run([write_scenario(ellipse_config)], str(out), dxf=True) == EXIT_OK
    assert (out / 'ellipse_test' / 'path.dxf').exists()


def test_field_csv(ellipse_config, write_scenario, tmp_path):
    output = tmp_path / 'grid' / 'field.csv'
    code = cmd_field(write_scenario(ellipse_config), bbox=[-100.0, 100.0, -100.0, 100.0],
                     resolution=5, output_path=str(output), dxf=True)
    assert code == EXIT_OK
    frame = pd.read_csv(output)
    assert list(frame.columns) == FIELD_COLUMNS
    assert len(frame) == 25
    # Центр эллипса попадает в узел сетки
    assert frame['degenerate'].sum() == 1
    assert (tmp_path / 'grid' / 'field.dxf').exists()


def test_field_rejects_bad_grid(ellipse_config, write_scenario, tmp_path):
    path = write_scenario(ellipse_config)
    output = str(tmp_path / 'field.csv')
    assert cmd_field(path, resolution=1, output_path=output) == EXIT_CONFIG_VALIDATION
    assert cmd_field(path, bbox=[1.0, 0.0, 0.0, 1.0], output_path=output) == EXIT_CONFIG_VALIDATION


SHIPPED = sorted(os.path.splitext(name)[0] for name in os.listdir(get_scenarios_dir()) if name.endswith('.yaml'))


@pytest.mark.parametrize('name', SHIPPED)
def test_validate_shipped_curve(name, capsys):
    assert cmd_validate(name) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'derivatives: ok' in printed
    assert 'regularity: ok' in printed


def test_validate_flags_wrong_gradient(ellipse_config, write_scenario, capsys):
    def corrupted_circle(cfg):
        circle = make_circle(Vec2(0.0, 0.0), float(cfg['radius_m']))
        return ImplicitCurve(phi=circle.phi, grad=lambda p: circle.grad(p) * 2.0,
                             hessian=circle.hessian, c_star=circle.c_star,
                             c_star_inner=circle.c_star_inner, name='corrupted_circle',
                             grad_scale=circle.grad_scale)

    register_curve('corrupted_circle_cli', corrupted_circle)
    ellipse_config.update({'name': 'corrupted', 'curve': 'corrupted_circle_cli', 'radius_m': 60.0,
                           'initial_x_m': 150.0, 'initial_y_m': 0.0, 'initial_yaw_deg': 90.0})
    assert cmd_validate(write_scenario(ellipse_config)) == EXIT_CHECK_FAILED
    assert 'derivatives: FAILED' in capsys.readouterr().out


def test_tune_calm_is_satisfied(capsys):
    assert cmd_tune('paper_ellipse_calm', samples=2000) == EXIT_OK
    assert 'satisfied: yes' in capsys.readouterr().out


def test_tune_with_wind_fails(capsys):
    assert cmd_tune('paper_ellipse_wind') == EXIT_CHECK_FAILED
    assert 'satisfied: no' in capsys.readouterr().out


def test_tune_circle_needs_explicit_band():
    assert cmd_tune('circle_calm') == EXIT_CONFIG_VALIDATION
    assert cmd_tune('circle_calm', band_c=3600.0, samples=500) in (EXIT_OK, EXIT_CHECK_FAILED)


def test_tune_rejects_bad_bank_limit():
    assert cmd_tune('paper_ellipse_calm', bank_limit_deg=90.0) == EXIT_CONFIG_VALIDATION


def test_main_dispatch(ellipse_config, write_scenario, tmp_path):
    path = write_scenario(ellipse_config)
    out = tmp_path / 'out'
    assert main(['--log-level', 'WARNING', 'run', '--config', path, '--out', str(out)]) == EXIT_OK
    assert os.path.exists(out / 'ellipse_test' / 'report.csv')


def test_main_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(['run'])
    assert excinfo.value.code == 2


def test_guarded_commands_keep_identity():
    assert cmd_run.__name__ == 'cmd_run'
    assert cmd_tune.__wrapped__.__doc__ == cmd_tune.__doc__
    assert 'коэффициентов' in cmd_tune.__doc__


def test_tune_help_names_alignment_default(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(['tune', '--help'])
    help_text = ' '.join(capsys.readouterr().out.split())
    assert '--alignment' in help_text
    assert 'по умолчанию 0' in help_text
    assert build_parser().parse_args(['tune', '--config', 'x']).alignment == 0.0
