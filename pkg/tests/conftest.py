import math

import pytest
import yaml

from pathfollow.curve import EllipseParams, make_circle, make_ellipse, make_line
from pathfollow.geometry import Vec2
from pathfollow.gvf import Gains

# Начальная точка с phi = 3 на продолжении большой полуоси эллипса
ELLIPSE_START = Vec2(96.5925826289068, 25.8819045102521)


@pytest.fixture
def unit_circle():
    return make_circle(Vec2(0.0, 0.0), 1.0)


@pytest.fixture
def x_axis_line():
    return make_line(Vec2(0.0, 0.0), 0.0)


@pytest.fixture
def reference_ellipse():
    return make_ellipse(EllipseParams(center=Vec2(0.0, 0.0), a=50.0, b=75.0, alpha=math.radians(-15.0)))


@pytest.fixture
def reference_gains():
    return Gains(k_e=0.4, k_d=1.0)


@pytest.fixture
def ellipse_config():
    """Словарь сценария эллипса без ветра"""
    return {
        'name': 'ellipse_test',
        'curve': 'ellipse',
        'center_x_m': 0.0,
        'center_y_m': 0.0,
        'semi_axis_a_m': 50.0,
        'semi_axis_b_m': 75.0,
        'alpha_deg': -15.0,
        'airspeed_mps': 11.0,
        'k_e': 0.4,
        'k_d': 1.0,
        'initial_x_m': ELLIPSE_START.x,
        'initial_y_m': ELLIPSE_START.y,
        'initial_yaw_deg': 'field',
        'duration_s': 2.0,
        'integration_rate_hz': 600.0,
        'controller_rate_hz': 60.0,
        'log_rate_hz': 60.0,
    }


@pytest.fixture
def write_scenario(tmp_path):
    """Записывает словарь сценария в YAML и возвращает путь"""
    def _write(config, filename=None):
        path = tmp_path / (filename or f"{config.get('name', 'scenario')}.yaml")
        path.write_text(yaml.safe_dump(config, allow_unicode=True), encoding='utf-8')
        return str(path)
    return _write
