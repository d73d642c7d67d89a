"""
Неявные кривые: phi, градиент, гессиан, ошибка уровня и проверки регулярности.

Желаемая траектория задается нулевым уровнем phi(p) = 0. Ошибка e(p) = phi(p)
имеет знак и в общем случае не равна евклидову расстоянию. Кривая задается
тремя функциями (phi, grad, hessian) и полосой регулярности
{-c_star_inner <= phi <= c_star}, в которой градиент не обращается в ноль.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import logger
from .constants import (
    CIRCLE_INNER_FRACTION,
    DEFAULT_FD_STEP,
    DEFAULT_REGULARITY_SAMPLES,
    DEFAULT_SEED,
    ELLIPSE_C_STAR,
    ELLIPSE_C_STAR_INNER,
    EPS_FIELD_FACTOR,
    HESSIAN_SYMMETRY_RTOL,
)
from .errors import ConfigValidationError
from .geometry import E, ZERO_MAT, Mat2, Vec2

BBox = Tuple[float, float, float, float]  # (xmin, xmax, ymin, ymax)


@dataclass(frozen=True)
class ImplicitCurve:
    phi: Callable[[Vec2], float]
    grad: Callable[[Vec2], Vec2]
    hessian: Callable[[Vec2], Mat2]
    c_star: float
    c_star_inner: Optional[float] = None
    name: str = 'custom'
    grad_scale: float = 1.0
    bbox: BBox = (-200.0, 200.0, -200.0, 200.0)
    seed_point: Optional[Vec2] = None

    def __post_init__(self):
        if not self.c_star > 0:
            raise ValueError(f"c_star должен быть положительным: {self.c_star}")
        if self.c_star_inner is None:
            object.__setattr__(self, 'c_star_inner', self.c_star)
        elif not self.c_star_inner > 0:
            raise ValueError(
                f"c_star_inner должен быть положительным: {self.c_star_inner}")
        if not self.grad_scale > 0:
            raise ValueError(f"grad_scale должен быть положительным: {self.grad_scale}")

    @property
    def eps_field(self) -> float:
        return EPS_FIELD_FACTOR * self.grad_scale

    def band_limits(self, c: float) -> Tuple[float, float]:
        """Границы полосы |phi| <= c с учетом внутренней границы регулярности"""
        return -min(c, self.c_star_inner), c

    def in_band(self, p: Vec2, lower: float, upper: float) -> bool:
        value = self.phi(p)
        return math.isfinite(value) and lower <= value <= upper


@dataclass(frozen=True)
class EllipseParams:
    center: Vec2
    a: float
    b: float
    alpha: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(
                f"Полуоси эллипса должны быть положительными: a={self.a}, b={self.b}")


@dataclass
class ValidationReport:
    """Результат сравнения аналитических производных с центральными разностями"""
    probes: int
    max_grad_error: float
    max_hessian_error: float
    max_asymmetry: float
    worst_grad_point: Optional[Vec2] = None
    worst_hessian_point: Optional[Vec2] = None
    nonfinite_points: List[Vec2] = field(default_factory=list)

    def passed(self, tolerance: float) -> bool:
        return (not self.nonfinite_points
                and self.max_grad_error < tolerance
                and self.max_hessian_error < tolerance
                and self.max_asymmetry <= HESSIAN_SYMMETRY_RTOL)


@dataclass
class RegularityReport:
    lower: float
    upper: float
    samples: int
    min_grad_norm: float
    worst_point: Optional[Vec2]
    threshold: float

    @property
    def regular(self) -> bool:
        return self.samples > 0 and self.min_grad_norm > self.threshold


def eval_error(curve: ImplicitCurve, p: Vec2) -> float:
    """Знаковая ошибка уровня e(p) = phi(p)"""
    return curve.phi(p)


def normal(curve: ImplicitCurve, p: Vec2) -> Vec2:
    """n(p) = grad phi(p); нулевой вектор допустим"""
    return curve.grad(p)


def tangent(curve: ImplicitCurve, p: Vec2, direction: int = 1) -> Vec2:
    """
    tau = E n(p). Направление обхода меняется заменой E на -E.

    Args:
        curve: кривая
        p: точка
        direction: +1 или -1
    """
    n = curve.grad(p)
    return (E @ n) * direction


def _relative_error(diff: float, reference: float, floor: float) -> float:
    if diff == 0.0:
        return 0.0
    return diff / max(reference, floor)


def fd_validate(curve: ImplicitCurve, probe_points: List[Vec2], h: float = DEFAULT_FD_STEP) -> ValidationReport:
    """
    Сравнивает аналитические градиент и гессиан с центральными разностями.

    Args:
        curve: проверяемая кривая
        probe_points: точки проверки
        h: шаг разностной схемы

    Returns:
        ValidationReport: максимальные относительные ошибки по точкам
    """
    if not h > 0:
        raise ValueError(f"Шаг разностной схемы должен быть положительным: {h}")

    report = ValidationReport(probes=0, max_grad_error=0.0,
                              max_hessian_error=0.0, max_asymmetry=0.0)
    grad_floor = EPS_FIELD_FACTOR * curve.grad_scale
    dx = Vec2(h, 0.0)
    dy = Vec2(0.0, h)

    for p in probe_points:
        if not p.is_finite():
            raise ValueError(f"Точка проверки не конечна: {p}")
        try:
            phi_values = [curve.phi(p + dx), curve.phi(p - dx),
                          curve.phi(p + dy), curve.phi(p - dy)]
            grads = [curve.grad(p + dx), curve.grad(p - dx),
                     curve.grad(p + dy), curve.grad(p - dy)]
            g_an = curve.grad(p)
            h_an = curve.hessian(p)
        except (ArithmeticError, ValueError) as e:
            logger.warning(f"Ошибка вычисления кривой в точке {p}: {str(e)}")
            report.nonfinite_points.append(p)
            continue

        if (not all(math.isfinite(v) for v in phi_values)
                or not all(g.is_finite() for g in grads)
                or not g_an.is_finite() or not h_an.is_finite()):
            report.nonfinite_points.append(p)
            continue

        report.probes += 1
        g_fd = Vec2((phi_values[0] - phi_values[1]) / (2 * h),
                    (phi_values[2] - phi_values[3]) / (2 * h))
        grad_error = _relative_error(
            (g_an - g_fd).norm(), g_fd.norm(), grad_floor)
        if grad_error > report.max_grad_error:
            report.max_grad_error = grad_error
            report.worst_grad_point = p

        # Столбцы якобиана градиента
        col_x = (grads[0] - grads[1]) / (2 * h)
        col_y = (grads[2] - grads[3]) / (2 * h)
        h_fd = Mat2(col_x.x, col_y.x, col_x.y, col_y.y)
        hessian_error = _relative_error(
            (h_an - h_fd).frobenius(), h_fd.frobenius(), grad_floor)
        if hessian_error > report.max_hessian_error:
            report.max_hessian_error = hessian_error
            report.worst_hessian_point = p

        report.max_asymmetry = max(report.max_asymmetry, h_an.asymmetry())

    if report.nonfinite_points:
        logger.warning(
            f"Кривая '{curve.name}': нечисловые значения в {len(report.nonfinite_points)} точках")
    logger.info(
        f"Кривая '{curve.name}': {report.probes} точек, ошибка градиента {report.max_grad_error:.3e}, "
        f"ошибка гессиана {report.max_hessian_error:.3e}")
    return report


def random_probes(bbox: BBox, count: int, seed: int = DEFAULT_SEED) -> List[Vec2]:
    """Равномерные случайные точки в прямоугольнике"""
    xmin, xmax, ymin, ymax = bbox
    rng = np.random.default_rng(seed)
    xs = rng.uniform(xmin, xmax, count)
    ys = rng.uniform(ymin, ymax, count)
    return [Vec2(float(x), float(y)) for x, y in zip(xs, ys)]


def sample_band(curve: ImplicitCurve, lower: float, upper: float, count: int,
                bbox: Optional[BBox] = None, seed: int = DEFAULT_SEED,
                max_batches: int = 200) -> List[Vec2]:
    """
    Случайные точки полосы lower <= phi <= upper (выборка с отбраковкой).

    Возвращает не больше count точек; если полоса занимает малую долю
    прямоугольника, точек может оказаться меньше.
    """
    xmin, xmax, ymin, ymax = bbox if bbox is not None else curve.bbox
    rng = np.random.default_rng(seed)
    accepted = []
    batch = max(count, 256)
    for _ in range(max_batches):
        xs = rng.uniform(xmin, xmax, batch)
        ys = rng.uniform(ymin, ymax, batch)
        for x, y in zip(xs, ys):
            p = Vec2(float(x), float(y))
            if curve.in_band(p, lower, upper):
                accepted.append(p)
                if len(accepted) >= count:
                    return accepted
    logger.warning(
        f"Кривая '{curve.name}': в полосе [{lower}, {upper}] найдено только {len(accepted)} из {count} точек")
    return accepted


def check_regularity(curve: ImplicitCurve, lower: Optional[float] = None, upper: Optional[float] = None,
                     samples: int = DEFAULT_REGULARITY_SAMPLES, bbox: Optional[BBox] = None,
                     seed: int = DEFAULT_SEED) -> RegularityReport:
    """
    Проверяет grad phi != 0 в полосе регулярности выборкой точек.

    По умолчанию полоса равна {-c_star_inner <= phi <= c_star}.
    """
    lower = -curve.c_star_inner if lower is None else lower
    upper = curve.c_star if upper is None else upper
    points = sample_band(curve, lower, upper, samples, bbox=bbox, seed=seed)

    min_norm = math.inf
    worst = None
    for p in points:
        g = curve.grad(p).norm()
        if g < min_norm:
            min_norm = g
            worst = p

    report = RegularityReport(lower=lower, upper=upper, samples=len(points),
                              min_grad_norm=min_norm, worst_point=worst,
                              threshold=curve.eps_field)
    logger.info(
        f"Кривая '{curve.name}': полоса [{lower}, {upper}], {len(points)} точек, "
        f"min|grad| = {min_norm:.3e}")
    return report


def project_to_path(curve: ImplicitCurve, p: Vec2, iterations: int = 50) -> Optional[Vec2]:
    """Проекция Ньютона на phi = 0; None, если градиент вырожден"""
    for _ in range(iterations):
        n = curve.grad(p)
        n_sq = n.norm_sq()
        if n_sq <= curve.eps_field ** 2:
            return None
        value = curve.phi(p)
        p = p - n * (value / n_sq)
        if abs(value) <= 1e-12 * max(1.0, math.sqrt(n_sq)):
            break
    return p


def _inside(bbox: BBox, p: Vec2) -> bool:
    xmin, xmax, ymin, ymax = bbox
    return xmin <= p.x <= xmax and ymin <= p.y <= ymax


def trace_zero_level(curve: ImplicitCurve, seed_point: Optional[Vec2] = None, step: float = 1.0,
                     max_points: int = 5000, direction: int = 1) -> List[Vec2]:
    """
    Обходит нулевой уровень вдоль касательной с проекцией на кривую.

    Для замкнутых кривых обход останавливается при возврате к начальной точке,
    для незамкнутых - при выходе за область curve.bbox.
    """
    start = seed_point or curve.seed_point
    if start is None:
        xmin, xmax, ymin, ymax = curve.bbox
        start = Vec2(0.5 * (xmin + xmax), 0.5 * (ymin + ymax))
    start = project_to_path(curve, start)
    if start is None:
        logger.warning(f"Кривая '{curve.name}': не удалось спроецировать начальную точку")
        return []

    points = [start]
    p = start
    travelled = 0.0
    for _ in range(max_points - 1):
        t1 = tangent(curve, p, direction)
        if t1.norm() <= curve.eps_field:
            break
        mid = p + t1.unit() * (0.5 * step)
        t2 = tangent(curve, mid, direction)
        if t2.norm() <= curve.eps_field:
            break
        nxt = project_to_path(curve, p + t2.unit() * step)
        if nxt is None:
            break
        if not _inside(curve.bbox, nxt):
            points.append(nxt)
            break
        travelled += (nxt - p).norm()
        p = nxt
        if travelled > 3 * step and (p - start).norm() < 0.75 * step:
            points.append(start)
            break
        points.append(p)
    return points


def make_line(point: Vec2, direction_angle: float) -> ImplicitCurve:
    """
    Прямая через point с направлением direction_angle (рад).

    phi(p) = -sin(theta) (x - x0) + cos(theta) (y - y0), метры.
    При direction = +1 прямая проходится в направлении direction_angle.
    """
    s, c = math.sin(direction_angle), math.cos(direction_angle)
    n = Vec2(-s, c)

    def phi(p: Vec2) -> float:
        return -s * (p.x - point.x) + c * (p.y - point.y)

    def grad(p: Vec2) -> Vec2:
        return n

    def hessian(p: Vec2) -> Mat2:
        return ZERO_MAT

    return ImplicitCurve(phi=phi, grad=grad, hessian=hessian,
                         c_star=math.inf, c_star_inner=math.inf, name='line',
                         grad_scale=1.0,
                         bbox=(point.x - 200.0, point.x + 200.0, point.y - 200.0, point.y + 200.0),
                         seed_point=point)


def make_circle(center: Vec2, radius: float) -> ImplicitCurve:
    """
    Окружность phi(p) = |p - c|^2 - r^2 (м^2).

    Градиент вырождается только в центре, поэтому внутренняя граница полосы
    регулярности 0.75 r^2 (точки не ближе r/2 к центру).
    """
    if not radius > 0:
        raise ValueError(f"Радиус должен быть положительным: {radius}")
    r_sq = radius * radius
    h = Mat2(2.0, 0.0, 0.0, 2.0)

    def phi(p: Vec2) -> float:
        dx, dy = p.x - center.x, p.y - center.y
        return dx * dx + dy * dy - r_sq

    def grad(p: Vec2) -> Vec2:
        return Vec2(2.0 * (p.x - center.x), 2.0 * (p.y - center.y))

    def hessian(p: Vec2) -> Mat2:
        return h

    extent = 3.0 * radius
    return ImplicitCurve(phi=phi, grad=grad, hessian=hessian,
                         c_star=math.inf, c_star_inner=CIRCLE_INNER_FRACTION * r_sq,
                         name='circle', grad_scale=2.0 * radius,
                         bbox=(center.x - extent, center.x + extent,
                               center.y - extent, center.y + extent),
                         seed_point=Vec2(center.x + radius, center.y))


def make_ellipse(params: EllipseParams, c_star: float = ELLIPSE_C_STAR,
                 c_star_inner: float = ELLIPSE_C_STAR_INNER) -> ImplicitCurve:
    """
    Повернутый эллипс (безразмерная phi):

        phi = ((dx cos a - dy sin a) / a)^2 + ((dx sin a + dy cos a) / b)^2 - 1

    Градиент равен нулю только в центре h, где phi(h) = -1, поэтому
    внутренняя граница полосы регулярности меньше единицы.
    """
    hx, hy = params.center.x, params.center.y
    ca, sa = math.cos(params.alpha), math.sin(params.alpha)
    ia2 = 1.0 / (params.a * params.a)
    ib2 = 1.0 / (params.b * params.b)
    # Гессиан постоянный
    h = Mat2(2.0 * (ca * ca * ia2 + sa * sa * ib2),
             2.0 * ca * sa * (ib2 - ia2),
             2.0 * ca * sa * (ib2 - ia2),
             2.0 * (sa * sa * ia2 + ca * ca * ib2))

    def phi(p: Vec2) -> float:
        dx, dy = p.x - hx, p.y - hy
        u = dx * ca - dy * sa
        v = dx * sa + dy * ca
        return u * u * ia2 + v * v * ib2 - 1.0

    def grad(p: Vec2) -> Vec2:
        dx, dy = p.x - hx, p.y - hy
        u = dx * ca - dy * sa
        v = dx * sa + dy * ca
        return Vec2(2.0 * (u * ca * ia2 + v * sa * ib2),
                    2.0 * (-u * sa * ia2 + v * ca * ib2))

    def hessian(p: Vec2) -> Mat2:
        return h

    extent = 3.0 * max(params.a, params.b)
    return ImplicitCurve(phi=phi, grad=grad, hessian=hessian,
                         c_star=c_star, c_star_inner=c_star_inner, name='ellipse',
                         grad_scale=2.0 / max(params.a, params.b),
                         bbox=(hx - extent, hx + extent, hy - extent, hy + extent),
                         seed_point=Vec2(hx + params.a * ca, hy - params.a * sa))


# Реестр фабрик кривых для сценариев


def _line_from_config(cfg: dict) -> ImplicitCurve:
    return make_line(Vec2(float(cfg['point_x_m']), float(cfg['point_y_m'])),
                     math.radians(float(cfg['direction_angle_deg'])))


def _circle_from_config(cfg: dict) -> ImplicitCurve:
    return make_circle(Vec2(float(cfg['center_x_m']), float(cfg['center_y_m'])),
                       float(cfg['radius_m']))


def _ellipse_from_config(cfg: dict) -> ImplicitCurve:
    params = EllipseParams(center=Vec2(float(cfg['center_x_m']), float(cfg['center_y_m'])),
                           a=float(cfg['semi_axis_a_m']), b=float(cfg['semi_axis_b_m']),
                           alpha=math.radians(float(cfg['alpha_deg'])))
    return make_ellipse(params,
                        c_star=float(cfg.get('c_star', ELLIPSE_C_STAR)),
                        c_star_inner=float(cfg.get('c_star_inner', ELLIPSE_C_STAR_INNER)))


CURVE_FACTORIES: Dict[str, Callable[[dict], ImplicitCurve]] = {
    'line': _line_from_config,
    'circle': _circle_from_config,
    'ellipse': _ellipse_from_config,
}


def register_curve(kind: str, factory: Callable[[dict], ImplicitCurve]):
    """Регистрирует пользовательскую кривую для поля 'curve' сценария"""
    if kind in CURVE_FACTORIES:
        logger.warning(f"Фабрика кривой '{kind}' переопределена")
    CURVE_FACTORIES[kind] = factory


def build_curve(kind: str, cfg: dict) -> ImplicitCurve:
    """Строит кривую по имени и параметрам сценария"""
    factory = CURVE_FACTORIES.get(kind)
    if factory is None:
        raise ConfigValidationError(
            f"Неизвестный тип кривой '{kind}', доступны: {sorted(CURVE_FACTORIES)}")
    try:
        return factory(cfg)
    except KeyError as e:
        raise ConfigValidationError(
            f"Для кривой '{kind}' не указан параметр {str(e)}") from e
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(
            f"Некорректные параметры кривой '{kind}': {str(e)}") from e
