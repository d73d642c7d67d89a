"""
Направляющее векторное поле и закон управления рысканием.

    p_dot_d = direction * E n - k_e e n                       (поле)
    chi_dot_d = (p_dot_d x p_ddot_d) / |p_dot_d|^2            (скорость курса на поле)
    u = |p_dot| / (s cos beta) * (chi_dot_d + k_d p^T E p_d)  (команда рыскания)

Вторая производная поля вдоль движения:

    p_ddot_d = (direction * E - k_e e I) H p_dot - k_e (n^T p_dot) n

Знак chi_dot_d выведен из d(p_d)/dt = -chi_dot E p_d: chi_dot = -(dp_d/dt)^T E p_d,
что равно векторному произведению p_d x dp_d/dt. Проекция на нормаль к p_d
в этом выражении сокращается.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import logger
from .constants import (
    DEFAULT_SEED,
    DEFAULT_TUNE_SAMPLES,
    EPS_BETA,
    EPS_SPEED,
    GRAVITY,
)
from .curve import BBox, ImplicitCurve, sample_band
from .errors import DegenerateFieldError, ZeroGroundSpeedError
from .geometry import E, ZERO, Vec2, heading_vector


@dataclass(frozen=True)
class Gains:
    k_e: float
    k_d: float

    def __post_init__(self):
        if not (self.k_e > 0 and self.k_d > 0):
            raise ValueError(
                f"Коэффициенты должны быть положительными: k_e={self.k_e}, k_d={self.k_d}")


@dataclass(frozen=True)
class FieldSample:
    vector: Vec2
    level_error: float
    normal: Vec2
    degenerate: bool


@dataclass(frozen=True)
class GuidanceCommand:
    yaw_rate: float
    yaw_rate_raw: float
    desired_course_rate: float
    field: Vec2
    alignment_error: float
    level_error: float
    sideslip: float
    bank_cmd: float
    bank_cmd_raw: float
    v2: float
    saturated: bool = False
    beta_saturated: bool = False


@dataclass
class TuningReport:
    max_required_bank: float
    worst_point: Optional[Vec2]
    worst_ground_speed: float
    satisfied: bool
    bank_limit: float
    samples_used: int
    degenerate_skipped: int


def field(curve: ImplicitCurve, p: Vec2, gains: Gains, direction: int = 1) -> FieldSample:
    """
    Направляющее поле p_dot_d = direction E n - k_e e n.

    В критической точке (|p_dot_d| < eps_field) возвращается нулевой вектор
    с признаком degenerate; нормировать его нельзя.
    """
    n = curve.grad(p)
    e = curve.phi(p)
    tau = E @ n
    vector = tau * direction - n * (gains.k_e * e)
    if vector.norm() < curve.eps_field:
        return FieldSample(vector=ZERO, level_error=e, normal=n, degenerate=True)
    return FieldSample(vector=vector, level_error=e, normal=n, degenerate=False)


def field_acceleration(curve: ImplicitCurve, p: Vec2, p_dot: Vec2, gains: Gains,
                       direction: int, sample: FieldSample) -> Vec2:
    """d(p_dot_d)/dt вдоль движения с путевой скоростью p_dot"""
    hp = curve.hessian(p) @ p_dot
    n = sample.normal
    return ((E @ hp) * direction
            - hp * (gains.k_e * sample.level_error)
            - n * (gains.k_e * n.dot(p_dot)))


def desired_course_rate(curve: ImplicitCurve, p: Vec2, p_dot: Vec2, gains: Gains,
                        direction: int = 1, sample: Optional[FieldSample] = None) -> float:
    """
    Скорость курса, сохраняющая совпадение направления p_dot с полем.

    Зависит только от положения p и путевой скорости p_dot.

    Raises:
        DegenerateFieldError: поле вырождено в p
        ZeroGroundSpeedError: |p_dot| < EPS_SPEED
    """
    if sample is None:
        sample = field(curve, p, gains, direction)
    if sample.degenerate:
        raise DegenerateFieldError(f"Поле вырождено в точке ({p.x:.3f}, {p.y:.3f})")
    if p_dot.norm() < EPS_SPEED:
        raise ZeroGroundSpeedError(f"Нулевая путевая скорость в точке ({p.x:.3f}, {p.y:.3f})")
    p_ddot_d = field_acceleration(curve, p, p_dot, gains, direction, sample)
    return sample.vector.cross(p_ddot_d) / sample.vector.norm_sq()


def sideslip(p_dot: Vec2, psi: float) -> float:
    """beta = arccos(p_hat^T m(psi)) в [0, pi]"""
    speed = p_dot.norm()
    if speed < EPS_SPEED:
        raise ZeroGroundSpeedError("Угол скольжения не определен при нулевой путевой скорости")
    cos_beta = p_dot.dot(heading_vector(psi)) / speed
    return math.acos(max(-1.0, min(1.0, cos_beta)))


def alignment_error(p_hat: Vec2, p_d_hat: Vec2) -> float:
    """p_hat^T E p_d_hat = sin угла от p_hat до p_d_hat"""
    return max(-1.0, min(1.0, p_hat.dot(E @ p_d_hat)))


def yaw_rate_from_bank(bank: float, s: float, theta: float = 0.0) -> float:
    """Координированный разворот: psi_dot = g tan(phi) cos(theta) / s"""
    if abs(bank) >= math.pi / 2:
        raise ValueError(f"Крен должен быть меньше 90 градусов: {math.degrees(bank)}")
    if abs(theta) >= math.pi / 2:
        raise ValueError(f"Тангаж должен быть меньше 90 градусов: {math.degrees(theta)}")
    if not s > 0:
        raise ValueError(f"Воздушная скорость должна быть положительной: {s}")
    return GRAVITY * math.tan(bank) * math.cos(theta) / s


def bank_from_yaw_rate(psi_dot: float, s: float, theta: float = 0.0) -> float:
    """Крен координированного разворота для заданной скорости рыскания"""
    if abs(theta) >= math.pi / 2:
        raise ValueError(f"Тангаж должен быть меньше 90 градусов: {math.degrees(theta)}")
    if not s > 0:
        raise ValueError(f"Воздушная скорость должна быть положительной: {s}")
    return math.atan(psi_dot * s / (GRAVITY * math.cos(theta)))


def aligned_heading(direction_vector: Vec2, s: float, wind: Vec2) -> float:
    """
    Рыскание, при котором s m(psi) + w параллельно direction_vector.

    Требует |w| < s.
    """
    if wind.norm() >= s:
        raise ValueError(f"Ветер {wind.norm():.3f} м/с не меньше воздушной скорости {s} м/с")
    d = direction_vector.unit()
    along = d.dot(wind)
    ground_speed = along + math.sqrt(along * along - wind.norm_sq() + s * s)
    air = d * ground_speed - wind
    return air.angle()


def control(curve: ImplicitCurve, state, p_dot: Vec2, s: float, gains: Gains, direction: int = 1,
            theta: float = 0.0, bank_limit: float = math.radians(45.0)) -> GuidanceCommand:
    """
    Команда скорости рыскания u с ограничением по крену.

    При |u| больше предела (крен bank_limit) команда ограничивается, исходное
    значение сохраняется в yaw_rate_raw. Если |cos beta| < EPS_BETA, cos beta
    заменяется на EPS_BETA со знаком и команда помечается beta_saturated.

    Args:
        curve: желаемая траектория
        state: VehicleState (положение p, рыскание psi)
        p_dot: путевая скорость
        s: воздушная скорость
        gains: коэффициенты k_e, k_d
        direction: направление обхода (+1 или -1)
        theta: тангаж (рад)
        bank_limit: предельный крен (рад)
    """
    if not s > 0:
        raise ValueError(f"Воздушная скорость должна быть положительной: {s}")
    speed = p_dot.norm()
    if speed < EPS_SPEED:
        raise ZeroGroundSpeedError(
            f"Нулевая путевая скорость в точке ({state.p.x:.3f}, {state.p.y:.3f})")

    sample = field(curve, state.p, gains, direction)
    chi_dot_d = desired_course_rate(curve, state.p, p_dot, gains, direction, sample)

    p_hat = p_dot / speed
    p_d_hat = sample.vector.unit()
    align = alignment_error(p_hat, p_d_hat)
    beta = sideslip(p_dot, state.psi)

    cos_beta = math.cos(beta)
    beta_saturated = abs(cos_beta) < EPS_BETA
    if beta_saturated:
        cos_beta = math.copysign(EPS_BETA, cos_beta)

    u_raw = speed / (s * cos_beta) * (chi_dot_d + gains.k_d * align)
    u_max = yaw_rate_from_bank(bank_limit, s, theta)
    u = max(-u_max, min(u_max, u_raw))
    saturated = u != u_raw
    if saturated:
        logger.debug(f"Команда рыскания ограничена: {u_raw:.4f} -> {u:.4f} рад/с")

    return GuidanceCommand(
        yaw_rate=u,
        yaw_rate_raw=u_raw,
        desired_course_rate=chi_dot_d,
        field=sample.vector,
        alignment_error=align,
        level_error=sample.level_error,
        sideslip=beta,
        bank_cmd=bank_from_yaw_rate(u, s, theta),
        bank_cmd_raw=bank_from_yaw_rate(u_raw, s, theta),
        v2=max(0.0, 1.0 - p_hat.dot(p_d_hat)),
        saturated=saturated,
        beta_saturated=beta_saturated,
    )


def tune_check(curve: ImplicitCurve, gains: Gains, band: float, s: float, w_max: float,
               theta: float, bank_limit: float, samples: int = DEFAULT_TUNE_SAMPLES,
               direction: int = 1, alignment: float = 0.0, bbox: Optional[BBox] = None,
               seed: int = DEFAULT_SEED) -> TuningReport:
    """
    Проверка настройки коэффициентов по предельному крену.

    В точках полосы |phi| <= band (внутренняя граница не глубже c_star_inner)
    вычисляется требуемый крен при худшей путевой скорости s + w_max,
    движении вдоль поля и заданной ошибке выравнивания |p^T E p_d|
    (0 - условие настройки при совпадении с полем, 1 - консервативная оценка k_d).

    Args:
        curve: траектория
        gains: коэффициенты
        band: полуширина полосы c (0 <= c <= c_star)
        s: воздушная скорость
        w_max: ожидаемый максимальный ветер (< s)
        theta: тангаж
        bank_limit: предельный крен phi*
        samples: число точек полосы
        alignment: предполагаемая ошибка выравнивания в [0, 1]; 0 - условие
            настройки для выровненного полета, 1 - наихудший случай

    Returns:
        TuningReport
    """
    if not 0 <= band <= curve.c_star:
        raise ValueError(f"Полоса c={band} должна лежать в [0, c_star={curve.c_star}]")
    if not 0 <= w_max < s:
        raise ValueError(f"Ветер {w_max} м/с должен быть меньше воздушной скорости {s} м/с")
    if not 0 <= alignment <= 1:
        raise ValueError(f"Ошибка выравнивания должна лежать в [0, 1]: {alignment}")

    lower, upper = curve.band_limits(band)
    points = sample_band(curve, lower, upper, samples, bbox=bbox, seed=seed)
    if not points:
        raise ValueError(f"В полосе [{lower}, {upper}] не найдено ни одной точки")

    ground_speed = s + w_max
    max_bank = 0.0
    worst = None
    used = 0
    skipped = 0
    for p in points:
        sample = field(curve, p, gains, direction)
        if sample.degenerate:
            skipped += 1
            continue
        p_dot = sample.vector.unit() * ground_speed
        chi_dot_d = desired_course_rate(curve, p, p_dot, gains, direction, sample)
        u_required = ground_speed / s * (abs(chi_dot_d) + gains.k_d * alignment)
        required_bank = abs(bank_from_yaw_rate(u_required, s, theta))
        used += 1
        if required_bank > max_bank:
            max_bank = required_bank
            worst = p

    if skipped:
        logger.warning(f"Пропущено {skipped} точек с вырожденным полем")
    report = TuningReport(max_required_bank=max_bank, worst_point=worst,
                          worst_ground_speed=ground_speed,
                          satisfied=max_bank <= bank_limit, bank_limit=bank_limit,
                          samples_used=used, degenerate_skipped=skipped)
    logger.info(
        f"Проверка настройки: требуемый крен {math.degrees(max_bank):.2f} град, "
        f"предел {math.degrees(bank_limit):.2f} град, {'выполнено' if report.satisfied else 'НЕ выполнено'}")
    return report
