"""
Функции Ляпунова и показатели сходимости по журналу моделирования.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import TYPE_CHECKING, Optional

import numpy as np

from .config import logger
from .constants import DEFAULT_SETTLE_TOLERANCE, DEFAULT_V2_TOLERANCE, GRAVITY, UNIT_NORM_TOLERANCE
from .geometry import E, Vec2

if TYPE_CHECKING:
    from .sim import TrajectoryLog

# Соседние с ограниченными командами записи не участвуют в сравнении dV2/dt
CLAMP_MARGIN = 2


def lyapunov_v1(e: float) -> float:
    """V1 = e^2 / 2"""
    return 0.5 * e * e


def _check_unit(v: Vec2, name: str):
    if abs(v.norm() - 1.0) > UNIT_NORM_TOLERANCE:
        raise ValueError(f"Вектор {name} должен быть единичным, |{name}| = {v.norm():.12f}")


def lyapunov_v2(p_hat: Vec2, p_d_hat: Vec2) -> float:
    """
    V2 = 1 - p_hat^T p_d_hat, значение в [0, 2].

    Raises:
        ValueError: хотя бы один из векторов не единичный
    """
    _check_unit(p_hat, 'p_hat')
    _check_unit(p_d_hat, 'p_d_hat')
    return min(2.0, max(0.0, 1.0 - p_hat.dot(p_d_hat)))


def v2_rate_closed_form(p_hat: Vec2, p_d_hat: Vec2, k_d: float) -> float:
    """dV2/dt = -k_d (p_hat^T E p_d_hat)^2"""
    _check_unit(p_hat, 'p_hat')
    _check_unit(p_d_hat, 'p_d_hat')
    s = p_hat.dot(E @ p_d_hat)
    return -k_d * s * s


@dataclass
class ConvergenceReport:
    settle_time: Optional[float]
    steady_state_error: float
    max_bank: float
    bank_exceedance_count: int
    v2_violations: int
    samples: int
    duration: float
    final_error: float
    v2_rate_max_mismatch: float
    v2_samples_checked: int
    tolerance: float
    termination_reason: Optional[str] = None

    @property
    def settled(self) -> bool:
        return self.settle_time is not None

    def to_row(self) -> dict:
        row = asdict(self)
        row['max_bank_deg'] = math.degrees(self.max_bank)
        row['termination_reason'] = self.termination_reason or ''
        return row

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_row().items():
            if isinstance(value, float):
                value = f"{value:.10g}"
            elif value is None:
                value = 'none'
            lines.append(f"{key}: {value}")
        return '\n'.join(lines) + '\n'


def _settle(t: np.ndarray, abs_e: np.ndarray, tolerance: float):
    outside = np.nonzero(abs_e >= tolerance)[0]
    if outside.size == 0:
        return float(t[0]), float(abs_e.max())
    last = int(outside[-1])
    if last == len(t) - 1:
        return None, math.nan
    return float(t[last + 1]), float(abs_e[last + 1:].max())


def analyze(log: 'TrajectoryLog', tolerance: float = DEFAULT_SETTLE_TOLERANCE,
            v2_tolerance: float = DEFAULT_V2_TOLERANCE) -> ConvergenceReport:
    """
    Показатели сходимости по журналу.

    Args:
        log: журнал моделирования
        tolerance: допуск |e| для времени установления
        v2_tolerance: допустимый рост V2 между соседними записями в единицах
            интервала записи (рост > v2_tolerance * dt считается нарушением)

    Returns:
        ConvergenceReport

    Raises:
        ValueError: в журнале меньше 3 записей
    """
    if len(log.records) < 3:
        raise ValueError(f"Для анализа нужно не меньше 3 записей, получено {len(log.records)}")
    if not tolerance > 0:
        raise ValueError(f"Допуск должен быть положительным: {tolerance}")

    t = log.column('t')
    e = log.column('e')
    v2 = log.column('v2')
    align = log.column('align_err')
    u_raw = log.column('u_raw')
    excluded = log.column('saturated') | log.column('beta_saturated')

    abs_e = np.abs(e)
    settle_time, steady_error = _settle(t, abs_e, tolerance)

    airspeed = log.column('airspeed')
    airspeed = np.where(np.isfinite(airspeed), airspeed, log.airspeed)
    raw_bank = np.abs(np.arctan(u_raw * airspeed / (GRAVITY * math.cos(log.pitch))))
    max_bank = float(raw_bank.max())
    exceedances = int(np.count_nonzero(raw_bank > log.bank_limit + 1e-12))

    # Рост V2 между соседними записями при неограниченной команде
    dv2 = np.diff(v2)
    dt = np.diff(t)
    free = ~(excluded[:-1] | excluded[1:])
    v2_violations = int(np.count_nonzero(free & (dv2 > v2_tolerance * dt)))

    # Численная производная V2 против -k_d (p^T E p_d)^2
    rate = np.gradient(v2, t, edge_order=2)
    closed = -log.k_d * align ** 2
    near_clamp = excluded.copy()
    for shift in range(1, CLAMP_MARGIN + 1):
        near_clamp[shift:] |= excluded[:-shift]
        near_clamp[:-shift] |= excluded[shift:]
    checked = ~near_clamp
    mismatch = float(np.abs(rate - closed)[checked].max()) if checked.any() else 0.0

    report = ConvergenceReport(
        settle_time=settle_time,
        steady_state_error=steady_error,
        max_bank=max_bank,
        bank_exceedance_count=exceedances,
        v2_violations=v2_violations,
        samples=len(log.records),
        duration=float(t[-1] - t[0]),
        final_error=float(e[-1]),
        v2_rate_max_mismatch=mismatch,
        v2_samples_checked=int(checked.sum()),
        tolerance=tolerance,
        termination_reason=log.termination_reason,
    )
    if v2_violations:
        logger.warning(f"V2 возрастал при неограниченной команде: {v2_violations} раз")
    logger.info(
        f"Анализ: установление {'нет' if settle_time is None else f'{settle_time:.2f} с'}, "
        f"max крен {math.degrees(max_bank):.2f} град, превышений {exceedances}")
    return report
