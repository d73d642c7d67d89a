"""
Кинематическое моделирование замкнутого контура.

Модель: p_dot = s(t) m(psi) + w(t), psi_dot = u. Воздушная скорость постоянна
или меняется по гармоническому закону; s(t) и w(t) в законе управления
берутся текущими, их производные не компенсируются. Интегрирование классическим
методом Рунге-Кутты 4-го порядка. Регулятор работает с частотой
controller_rate_hz и удерживает команду между обновлениями; при
controller_rate_hz = 0 закон управления вычисляется на каждой стадии
интегрирования (непрерывное управление).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .analysis import lyapunov_v1, lyapunov_v2
from .config import logger
from .constants import (
    DEFAULT_BANK_LIMIT_DEG,
    DEFAULT_CONTROLLER_RATE_HZ,
    DEFAULT_DURATION_S,
    DEFAULT_INTEGRATION_RATE_HZ,
    EPS_SPEED,
    FIELD_COLUMNS,
    TRAJECTORY_COLUMNS,
    WIND_KINDS,
)
from .curve import BBox, ImplicitCurve
from .errors import ConfigValidationError, GuidanceError, ZeroGroundSpeedError
from .geometry import Vec2, heading_vector, wrap_angle
from .gvf import (
    GuidanceCommand,
    Gains,
    aligned_heading,
    alignment_error,
    bank_from_yaw_rate,
    control,
    desired_course_rate,
    field,
    sideslip,
)


@dataclass(frozen=True)
class VehicleState:
    p: Vec2
    psi: float

    def __post_init__(self):
        object.__setattr__(self, 'psi', wrap_angle(self.psi))

    def is_finite(self) -> bool:
        return self.p.is_finite() and math.isfinite(self.psi)


@dataclass(frozen=True)
class WindModel:
    """
    Модель ветра.

    constant: w(t) = base
    gust:     w(t) = base + amplitude * sin(2 pi t / period) * (cos d, sin d),
              d - направление порыва
    """
    kind: str = 'constant'
    base: Vec2 = Vec2(0.0, 0.0)
    gust_amplitude: float = 0.0
    gust_period: float = 0.0
    gust_direction: float = 0.0

    def __post_init__(self):
        if self.kind not in WIND_KINDS:
            raise ValueError(f"Неизвестный тип ветра '{self.kind}', допустимые: {', '.join(WIND_KINDS)}")
        if not self.base.is_finite():
            raise ValueError("Базовый ветер должен быть конечным")
        if self.kind == 'gust':
            if not self.gust_amplitude >= 0:
                raise ValueError(f"Амплитуда порывов должна быть неотрицательной: {self.gust_amplitude}")
            if not self.gust_period > 0:
                raise ValueError(f"Период порывов должен быть положительным: {self.gust_period}")

    def at(self, t: float) -> Vec2:
        if self.kind == 'constant':
            return self.base
        gust = self.gust_amplitude * math.sin(2.0 * math.pi * t / self.gust_period)
        return self.base + heading_vector(self.gust_direction) * gust

    def sup_norm(self) -> float:
        """Верхняя оценка sup |w(t)|"""
        if self.kind == 'constant':
            return self.base.norm()
        return self.base.norm() + self.gust_amplitude


@dataclass
class SimConfig:
    curve: ImplicitCurve
    gains: Gains
    airspeed: float
    initial_state: VehicleState
    wind: WindModel = dc_field(default_factory=WindModel)
    direction: int = 1
    pitch: float = 0.0
    bank_limit: float = math.radians(DEFAULT_BANK_LIMIT_DEG)
    dt: float = 1.0 / DEFAULT_INTEGRATION_RATE_HZ
    duration: float = DEFAULT_DURATION_S
    controller_rate_hz: float = DEFAULT_CONTROLLER_RATE_HZ
    log_rate_hz: Optional[float] = None
    align_initial_yaw: bool = False
    check_wind_margin: bool = True
    # s(t) = airspeed + airspeed_amplitude * sin(2 pi t / airspeed_period)
    airspeed_amplitude: float = 0.0
    airspeed_period: float = 0.0

    def airspeed_at(self, t: float) -> float:
        if not self.airspeed_amplitude:
            return self.airspeed
        return self.airspeed + self.airspeed_amplitude * math.sin(2.0 * math.pi * t / self.airspeed_period)

    def min_airspeed(self) -> float:
        return self.airspeed - abs(self.airspeed_amplitude)

    def max_airspeed(self) -> float:
        return self.airspeed + abs(self.airspeed_amplitude)

    def validate(self):
        """
        Проверяет согласованность параметров.

        Raises:
            ConfigValidationError: при нарушении ограничений
        """
        if not self.airspeed > 0:
            raise ConfigValidationError(f"Воздушная скорость должна быть положительной: {self.airspeed}")
        if self.airspeed_amplitude:
            if not (math.isfinite(self.airspeed_amplitude) and self.airspeed_period > 0):
                raise ConfigValidationError(
                    f"Период изменения воздушной скорости должен быть положительным: {self.airspeed_period}")
            if not self.min_airspeed() > 0:
                raise ConfigValidationError(
                    f"Воздушная скорость должна оставаться положительной: min s = {self.min_airspeed():.3f} м/с")
        if self.direction not in (1, -1):
            raise ConfigValidationError(f"Направление обхода должно быть +1 или -1: {self.direction}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigValidationError(f"Шаг интегрирования должен быть положительным: {self.dt}")
        if not self.duration > 0:
            raise ConfigValidationError(f"Длительность должна быть положительной: {self.duration}")
        if not 0 < self.bank_limit < math.pi / 2:
            raise ConfigValidationError(
                f"Предельный крен должен лежать в (0, 90) градусов: {math.degrees(self.bank_limit)}")
        if not abs(self.pitch) < math.pi / 2:
            raise ConfigValidationError(f"Тангаж должен быть меньше 90 градусов: {math.degrees(self.pitch)}")
        if self.controller_rate_hz < 0:
            raise ConfigValidationError(
                f"Частота регулятора не может быть отрицательной: {self.controller_rate_hz}")
        if self.controller_rate_hz > 0 and 1.0 / self.controller_rate_hz < self.dt * (1 - 1e-9):
            raise ConfigValidationError(
                f"Частота регулятора {self.controller_rate_hz} Гц выше частоты интегрирования {1.0 / self.dt} Гц")
        if self.log_rate_hz is not None:
            self.log_every()
        if not self.initial_state.is_finite():
            raise ConfigValidationError("Начальное состояние должно быть конечным")
        if self.check_wind_margin and self.wind.sup_norm() >= self.min_airspeed():
            raise ConfigValidationError(
                f"Воздушная скорость должна превышать ветер: sup|w| = {self.wind.sup_norm():.3f} м/с, "
                f"min s = {self.min_airspeed():.3f} м/с")

    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def log_every(self) -> int:
        """Число шагов интегрирования между записями журнала"""
        if self.log_rate_hz is None:
            return 1
        if not self.log_rate_hz > 0:
            raise ConfigValidationError(f"Частота записи должна быть положительной: {self.log_rate_hz}")
        ratio = 1.0 / (self.log_rate_hz * self.dt)
        every = int(round(ratio))
        if every < 1 or abs(ratio - every) > 1e-6:
            raise ConfigValidationError(
                f"Частота записи {self.log_rate_hz} Гц должна делить частоту интегрирования {1.0 / self.dt} Гц")
        return every


@dataclass(frozen=True)
class LogRecord:
    t: float
    p: Vec2
    psi: float
    p_dot: Vec2
    e: float
    v1: float
    v2: float
    u_raw: float
    u_clamped: float
    chi_dot_d: float
    beta: float
    phi_cmd: float
    align_err: float
    saturated: bool = False
    beta_saturated: bool = False
    airspeed: float = math.nan

    def row(self) -> list:
        return [self.t, self.p.x, self.p.y, self.psi, self.p_dot.x, self.p_dot.y,
                self.e, self.v1, self.v2, self.u_raw, self.u_clamped, self.chi_dot_d,
                self.beta, self.phi_cmd, self.align_err]


@dataclass
class TrajectoryLog:
    records: List[LogRecord] = dc_field(default_factory=list)
    airspeed: float = 0.0
    pitch: float = 0.0
    bank_limit: float = math.radians(DEFAULT_BANK_LIMIT_DEG)
    k_d: float = 1.0
    dt: float = 1.0 / DEFAULT_INTEGRATION_RATE_HZ
    termination_reason: Optional[str] = None

    @property
    def completed(self) -> bool:
        return self.termination_reason is None

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        """Столбец журнала как массив numpy (имена полей LogRecord)"""
        return np.array([getattr(r, name) for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.row() for r in self.records], columns=TRAJECTORY_COLUMNS)


def ground_velocity(state: VehicleState, s: float, wind: WindModel, t: float) -> Vec2:
    """p_dot = s m(psi) + w(t)"""
    return heading_vector(state.psi) * s + wind.at(t)


Derivative = Callable[[float, Vec2, float], Tuple[Vec2, float]]


def _rk4(state: VehicleState, t: float, dt: float, derivative: Derivative) -> VehicleState:
    p0, psi0 = state.p, state.psi
    v1, r1 = derivative(t, p0, psi0)
    v2, r2 = derivative(t + dt / 2, p0 + v1 * (dt / 2), psi0 + r1 * dt / 2)
    v3, r3 = derivative(t + dt / 2, p0 + v2 * (dt / 2), psi0 + r2 * dt / 2)
    v4, r4 = derivative(t + dt, p0 + v3 * dt, psi0 + r3 * dt)
    p = p0 + (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0)
    psi = psi0 + (r1 + 2.0 * r2 + 2.0 * r3 + r4) * dt / 6.0
    return VehicleState(p, psi)


def step(state: VehicleState, u: float, s: float, wind: WindModel, t: float, dt: float) -> VehicleState:
    """
    Один шаг РК4 при постоянной команде u.

    Raises:
        ValueError: dt <= 0 или неконечные входные данные
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"Шаг интегрирования должен быть положительным: {dt}")
    if not (state.is_finite() and math.isfinite(u) and math.isfinite(s) and math.isfinite(t)):
        raise ValueError("Неконечные входные данные шага интегрирования")

    def derivative(tau: float, p: Vec2, psi: float) -> Tuple[Vec2, float]:
        return heading_vector(psi) * s + wind.at(tau), u

    return _rk4(state, t, dt, derivative)


def initial_state(config: SimConfig) -> VehicleState:
    """Начальное состояние; при align_initial_yaw рыскание выравнивается по полю"""
    state = config.initial_state
    if not config.align_initial_yaw:
        return state
    sample = field(config.curve, state.p, config.gains, config.direction)
    if sample.degenerate:
        raise ConfigValidationError("Начальная точка лежит в критической точке поля")
    psi = aligned_heading(sample.vector, config.airspeed_at(0.0), config.wind.at(0.0))
    return VehicleState(state.p, psi)


def _record(config: SimConfig, state: VehicleState, t: float, cmd: GuidanceCommand) -> LogRecord:
    """Запись журнала: ошибки в текущем состоянии, команда - удерживаемая"""
    s = config.airspeed_at(t)
    p_dot = ground_velocity(state, s, config.wind, t)
    speed = p_dot.norm()
    if speed < EPS_SPEED:
        raise ZeroGroundSpeedError(f"Нулевая путевая скорость при t={t:.3f}")
    sample = field(config.curve, state.p, config.gains, config.direction)
    if sample.degenerate:
        raise GuidanceError(f"Поле вырождено при t={t:.3f}")
    p_hat = p_dot / speed
    p_d_hat = sample.vector.unit()
    return LogRecord(
        t=t,
        p=state.p,
        psi=state.psi,
        p_dot=p_dot,
        e=sample.level_error,
        v1=lyapunov_v1(sample.level_error),
        v2=lyapunov_v2(p_hat, p_d_hat),
        u_raw=cmd.yaw_rate_raw,
        u_clamped=cmd.yaw_rate,
        chi_dot_d=cmd.desired_course_rate,
        beta=sideslip(p_dot, state.psi),
        phi_cmd=cmd.bank_cmd,
        align_err=alignment_error(p_hat, p_d_hat),
        saturated=cmd.saturated,
        beta_saturated=cmd.beta_saturated,
        airspeed=s,
    )


def run(config: SimConfig) -> TrajectoryLog:
    """
    Моделирование замкнутого контура на всем интервале.

    Особенность закона управления (вырожденное поле, нулевая путевая
    скорость) не приводит к исключению: моделирование останавливается,
    журнал сохраняется, причина записывается в termination_reason.

    Raises:
        ConfigValidationError: некорректная конфигурация
    """
    config.validate()
    log = TrajectoryLog(airspeed=config.airspeed, pitch=config.pitch, bank_limit=config.bank_limit,
                        k_d=config.gains.k_d, dt=config.dt)
    airspeed_at = config.airspeed_at
    wind = config.wind
    dt = config.dt
    n_steps = config.steps()
    log_every = config.log_every()
    continuous = config.controller_rate_hz == 0

    def command(state: VehicleState, t: float) -> GuidanceCommand:
        s = airspeed_at(t)
        p_dot = ground_velocity(state, s, wind, t)
        return control(config.curve, state, p_dot, s, config.gains, config.direction,
                       config.pitch, config.bank_limit)

    def closed_loop(tau: float, p: Vec2, psi: float) -> Tuple[Vec2, float]:
        cmd = command(VehicleState(p, psi), tau)
        return heading_vector(psi) * airspeed_at(tau) + wind.at(tau), cmd.yaw_rate

    def held(tau: float, p: Vec2, psi: float) -> Tuple[Vec2, float]:
        return heading_vector(psi) * airspeed_at(tau) + wind.at(tau), cmd.yaw_rate

    logger.info(
        f"Моделирование: {n_steps} шагов по {dt:.6f} с, регулятор "
        f"{'непрерывный' if continuous else f'{config.controller_rate_hz:g} Гц'}")

    saturated_updates = 0
    next_update = 0
    cmd = None
    t = 0.0
    try:
        state = initial_state(config)
        for k in range(n_steps + 1):
            t = k * dt
            if continuous or t >= next_update / config.controller_rate_hz - 1e-9 * dt:
                cmd = command(state, t)
                next_update += 1
                if cmd.saturated:
                    saturated_updates += 1
            if k % log_every == 0:
                log.records.append(_record(config, state, t, cmd))
            if k == n_steps:
                break
            if continuous:
                state = _rk4(state, t, dt, closed_loop)
            else:
                state = _rk4(state, t, dt, held)
            if not state.is_finite():
                log.termination_reason = f"Неконечное состояние при t={t + dt:.3f}"
                logger.error(log.termination_reason)
                break
    except GuidanceError as e:
        log.termination_reason = f"Особенность закона управления при t={t:.3f}: {e}"
        logger.error(log.termination_reason)

    if saturated_updates:
        logger.info(f"Команда рыскания ограничивалась {saturated_updates} раз")
    logger.info(f"Моделирование завершено: {len(log)} записей")
    return log


@dataclass
class FieldGrid:
    xs: np.ndarray
    ys: np.ndarray
    ux: np.ndarray       # (len(ys), len(xs))
    uy: np.ndarray
    degenerate: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        gx, gy = np.meshgrid(self.xs, self.ys)
        return pd.DataFrame({
            FIELD_COLUMNS[0]: gx.ravel(),
            FIELD_COLUMNS[1]: gy.ravel(),
            FIELD_COLUMNS[2]: self.ux.ravel(),
            FIELD_COLUMNS[3]: self.uy.ravel(),
            FIELD_COLUMNS[4]: self.degenerate.ravel().astype(int),
        })


def sample_field_grid(curve: ImplicitCurve, bbox: BBox, resolution: Union[int, Tuple[int, int]],
                      gains: Gains, direction: int = 1) -> FieldGrid:
    """
    Нормированные направления поля в узлах сетки.

    Args:
        bbox: (xmin, xmax, ymin, ymax)
        resolution: число узлов по каждой оси (или пара (nx, ny)), не меньше 2
    """
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nx < 2 or ny < 2:
        raise ValueError(f"Разрешение сетки должно быть не меньше 2: {nx}x{ny}")
    xmin, xmax, ymin, ymax = bbox
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"Некорректная область: {bbox}")

    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    ux = np.zeros((ny, nx))
    uy = np.zeros((ny, nx))
    degenerate = np.zeros((ny, nx), dtype=bool)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            sample = field(curve, Vec2(float(x), float(y)), gains, direction)
            if sample.degenerate:
                degenerate[j, i] = True
                continue
            u = sample.vector.unit()
            ux[j, i] = u.x
            uy[j, i] = u.y

    masked = int(degenerate.sum())
    if masked:
        logger.info(f"Сетка поля: {masked} вырожденных узлов из {nx * ny}")
    return FieldGrid(xs=xs, ys=ys, ux=ux, uy=uy, degenerate=degenerate)


@dataclass(frozen=True)
class CourseFlowSample:
    t: float
    p: Vec2
    chi: float
    misalignment: float


def simulate_course_flow(curve: ImplicitCurve, gains: Gains, direction: int, p0: Vec2, speed: float,
                         duration: float, dt: float) -> List[CourseFlowSample]:
    """
    Движение точки с постоянной скоростью, курс которой меняется со
    скоростью desired_course_rate. При начальном курсе вдоль поля
    рассогласование с полем остается на уровне ошибки интегрирования.
    """
    if not speed > 0:
        raise ValueError(f"Скорость должна быть положительной: {speed}")
    if not dt > 0:
        raise ValueError(f"Шаг интегрирования должен быть положительным: {dt}")

    def derivative(t: float, p: Vec2, chi: float) -> Tuple[Vec2, float]:
        p_dot = heading_vector(chi) * speed
        return p_dot, desired_course_rate(curve, p, p_dot, gains, direction)

    def misalignment(state: VehicleState) -> float:
        sample = field(curve, state.p, gains, direction)
        if sample.degenerate:
            raise GuidanceError("Поток вышел в критическую точку поля")
        return abs(wrap_angle(state.psi - sample.vector.angle()))

    start = field(curve, p0, gains, direction)
    if start.degenerate:
        raise GuidanceError("Начальная точка потока - критическая точка поля")
    state = VehicleState(p0, start.vector.angle())
    samples = [CourseFlowSample(0.0, state.p, state.psi, misalignment(state))]
    for k in range(int(round(duration / dt))):
        state = _rk4(state, k * dt, dt, derivative)
        samples.append(CourseFlowSample((k + 1) * dt, state.p, state.psi, misalignment(state)))
    return samples
