"""
Загрузка сценариев из YAML.

Сценарий - плоский словарь, единицы измерения указаны в именах ключей
(airspeed_mps, alpha_deg, duration_s). Углы в файле задаются в градусах,
внутри пакета хранятся в радианах.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

from .config import get_scenarios_dir, logger
from .constants import (
    CURVE_REQUIRED_KEYS,
    DEFAULT_BANK_LIMIT_DEG,
    DEFAULT_CONTROLLER_RATE_HZ,
    DEFAULT_FIELD_RESOLUTION,
    DEFAULT_INTEGRATION_RATE_HZ,
    DEFAULT_METRIC_SETTLE_TOLERANCE,
    DEFAULT_PITCH_DEG,
    DEFAULT_SETTLE_TOLERANCE,
    DEFAULT_V2_TOLERANCE,
    SCENARIO_REQUIRED_KEYS,
    SUPPORTED_ENCODINGS,
)
from .curve import BBox, build_curve
from .errors import ConfigValidationError
from .geometry import Vec2
from .gvf import Gains
from .sim import SimConfig, VehicleState, WindModel
from .utils import check_critical_values, read_config_file, validate_config_keys

# Значение initial_yaw_deg для старта вдоль поля
ALIGNED_YAW = 'field'

POSITIVE_KEYS = ['airspeed_mps', 'k_e', 'k_d', 'duration_s', 'integration_rate_hz',
                 'bank_limit_deg', 'settle_tolerance', 'v2_tolerance', 'gust_period_s',
                 'log_rate_hz', 'airspeed_period_s']
FINITE_KEYS = ['initial_x_m', 'initial_y_m', 'pitch_deg', 'wind_x_mps', 'wind_y_mps',
               'gust_amplitude_mps', 'gust_direction_deg', 'controller_rate_hz',
               'airspeed_amplitude_mps']


@dataclass
class Scenario:
    name: str
    curve_kind: str
    sim: SimConfig
    settle_tolerance: float
    v2_tolerance: float = DEFAULT_V2_TOLERANCE
    field_bbox: Optional[BBox] = None
    field_resolution: int = DEFAULT_FIELD_RESOLUTION
    source_path: Optional[str] = None

    def output_dir(self, root: str) -> str:
        """Каталог результатов сценария внутри root"""
        return os.path.join(root, self.name)


def resolve_config_path(value: str) -> str:
    """
    Путь к файлу сценария.

    Имя без каталога и расширения (например, paper_ellipse_wind) указывает
    на встроенный сценарий.
    """
    if os.path.exists(value):
        return value
    if os.sep not in value and '/' not in value and not os.path.splitext(value)[1]:
        bundled = os.path.join(get_scenarios_dir(), f"{value}.yaml")
        if os.path.exists(bundled):
            return bundled
    return value


def _float(raw: dict, key: str, default: float) -> float:
    value = raw.get(key)
    return default if value is None else float(value)


def _int(raw: dict, key: str, default: int) -> int:
    value = raw.get(key)
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(f"'{key}' должно быть целым числом, получено {value!r}")
    return value


def _bool(raw: dict, key: str, default: bool) -> bool:
    value = raw.get(key)
    if value is None:
        return default
    if not isinstance(value, bool):
        raise ConfigValidationError(f"'{key}' должно быть true или false, получено {value!r}")
    return value


def scenario_from_dict(raw: dict, source_path: Optional[str] = None) -> Scenario:
    """
    Строит сценарий из словаря параметров.

    Raises:
        ConfigValidationError: отсутствуют ключи или значения некорректны
    """
    is_valid, missing = validate_config_keys(raw, SCENARIO_REQUIRED_KEYS)
    if not is_valid:
        raise ConfigValidationError(f"Отсутствуют обязательные параметры: {', '.join(missing)}")

    kind = str(raw['curve'])
    if kind in CURVE_REQUIRED_KEYS:
        is_valid, missing = validate_config_keys(raw, CURVE_REQUIRED_KEYS[kind])
        if not is_valid:
            raise ConfigValidationError(
                f"Для кривой '{kind}' отсутствуют параметры: {', '.join(missing)}")

    problems = check_critical_values(raw, POSITIVE_KEYS, FINITE_KEYS)
    if problems:
        raise ConfigValidationError('; '.join(problems))

    curve = build_curve(kind, raw)

    try:
        gains = Gains(k_e=float(raw['k_e']), k_d=float(raw['k_d']))
        wind = WindModel(
            kind=str(raw.get('wind_kind', 'constant')),
            base=Vec2(_float(raw, 'wind_x_mps', 0.0), _float(raw, 'wind_y_mps', 0.0)),
            gust_amplitude=_float(raw, 'gust_amplitude_mps', 0.0),
            gust_period=_float(raw, 'gust_period_s', 0.0),
            gust_direction=math.radians(_float(raw, 'gust_direction_deg', 0.0)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(str(e)) from e

    yaw = raw['initial_yaw_deg']
    align = isinstance(yaw, str) and yaw.strip().lower() == ALIGNED_YAW
    if not align:
        try:
            yaw = math.radians(float(yaw))
        except (TypeError, ValueError) as e:
            raise ConfigValidationError(
                f"initial_yaw_deg должен быть числом или '{ALIGNED_YAW}': {yaw!r}") from e
    start = VehicleState(Vec2(float(raw['initial_x_m']), float(raw['initial_y_m'])),
                         0.0 if align else yaw)

    sim = SimConfig(
        curve=curve,
        gains=gains,
        airspeed=float(raw['airspeed_mps']),
        initial_state=start,
        wind=wind,
        direction=_int(raw, 'direction', 1),
        pitch=math.radians(_float(raw, 'pitch_deg', DEFAULT_PITCH_DEG)),
        bank_limit=math.radians(_float(raw, 'bank_limit_deg', DEFAULT_BANK_LIMIT_DEG)),
        dt=1.0 / _float(raw, 'integration_rate_hz', DEFAULT_INTEGRATION_RATE_HZ),
        duration=float(raw['duration_s']),
        controller_rate_hz=_float(raw, 'controller_rate_hz', DEFAULT_CONTROLLER_RATE_HZ),
        log_rate_hz=_float(raw, 'log_rate_hz', None),
        align_initial_yaw=align,
        check_wind_margin=_bool(raw, 'check_wind_margin', True),
        airspeed_amplitude=_float(raw, 'airspeed_amplitude_mps', 0.0),
        airspeed_period=_float(raw, 'airspeed_period_s', 0.0),
    )
    sim.validate()

    default_tolerance = DEFAULT_METRIC_SETTLE_TOLERANCE if kind == 'line' else DEFAULT_SETTLE_TOLERANCE
    bbox = raw.get('field_bbox')
    if bbox is not None:
        if not (isinstance(bbox, (list, tuple)) and len(bbox) == 4):
            raise ConfigValidationError(f"field_bbox должен содержать 4 числа: {bbox!r}")
        try:
            bbox = tuple(float(v) for v in bbox)
        except (TypeError, ValueError) as e:
            raise ConfigValidationError(f"field_bbox должен содержать 4 числа: {bbox!r}") from e
    resolution = _int(raw, 'field_resolution', DEFAULT_FIELD_RESOLUTION)
    if resolution < 2:
        raise ConfigValidationError(f"field_resolution должно быть не меньше 2: {resolution}")

    return Scenario(
        name=str(raw['name']),
        curve_kind=kind,
        sim=sim,
        settle_tolerance=_float(raw, 'settle_tolerance', default_tolerance),
        v2_tolerance=_float(raw, 'v2_tolerance', DEFAULT_V2_TOLERANCE),
        field_bbox=bbox,
        field_resolution=resolution,
        source_path=source_path,
    )


def load_scenario(path: str) -> Scenario:
    """
    Загружает и проверяет сценарий.

    Raises:
        ConfigParseError: файл не читается или не разбирается
        ConfigValidationError: значения нарушают ограничения
    """
    resolved = resolve_config_path(path)
    raw = read_config_file(resolved, SUPPORTED_ENCODINGS)
    scenario = scenario_from_dict(raw, source_path=resolved)
    logger.info(f"Загружен сценарий '{scenario.name}' ({scenario.curve_kind}) из {resolved}")
    return scenario
