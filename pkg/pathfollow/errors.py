"""Исключения пакета"""


class PathFollowError(Exception):
    """Базовое исключение пакета"""


class ConfigParseError(PathFollowError):
    """Файл сценария не читается или не разбирается"""


class ConfigValidationError(PathFollowError, ValueError):
    """Значения сценария нарушают ограничения"""


class GuidanceError(PathFollowError, ArithmeticError):
    """Закон управления не определен в текущем состоянии"""


class DegenerateFieldError(GuidanceError):
    """Векторное поле вырождено (критическая точка phi)"""


class ZeroGroundSpeedError(GuidanceError):
    """Путевая скорость равна нулю"""
