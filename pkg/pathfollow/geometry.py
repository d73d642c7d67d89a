"""
Двумерные векторы и матрицы для контура наведения.

Vec2 хранит положения (м) и скорости (м/с) в навигационной системе
координат, Mat2 - гессианы и поворот E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> Vec2:
        return Vec2(self.x / k, self.y / k)

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: Vec2) -> float:
        """z-компонента векторного произведения"""
        return self.x * other.y - self.y * other.x

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> Vec2:
        """Единичный вектор; для нулевого вектора не определен"""
        length = self.norm()
        if length == 0.0:
            raise ValueError("Нельзя нормировать нулевой вектор")
        return Vec2(self.x / length, self.y / length)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class Mat2:
    """Матрица 2x2, элементы по строкам: [[a, b], [c, d]]"""
    a: float
    b: float
    c: float
    d: float

    def __matmul__(self, v: Vec2) -> Vec2:
        return Vec2(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def __mul__(self, k: float) -> Mat2:
        return Mat2(self.a * k, self.b * k, self.c * k, self.d * k)

    __rmul__ = __mul__

    def __add__(self, other: Mat2) -> Mat2:
        return Mat2(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: Mat2) -> Mat2:
        return Mat2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def frobenius(self) -> float:
        return math.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2)

    def asymmetry(self) -> float:
        """|b - c|, отнесенная к наибольшему по модулю элементу"""
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return abs(self.b - self.c) / scale if scale > 0 else 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.a, self.b, self.c, self.d))


ZERO = Vec2(0.0, 0.0)
ZERO_MAT = Mat2(0.0, 0.0, 0.0, 0.0)

# Поворот на -90 градусов: tau = E n
E = Mat2(0.0, 1.0, -1.0, 0.0)


def heading_vector(psi: float) -> Vec2:
    """m(psi) = (cos psi, sin psi)"""
    return Vec2(math.cos(psi), math.sin(psi))


def wrap_angle(angle: float) -> float:
    """Приводит угол к (-pi, pi]"""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped
