import logging
import math

import yaml

from .config import logger
from .errors import ConfigParseError


def set_log_level(level_name):
    """Устанавливает уровень логирования"""
    levels = {
        'DEBUG': logging.DEBUG,
        'INFO': logging.INFO,
        'WARNING': logging.WARNING,
        'ERROR': logging.ERROR,
        'CRITICAL': logging.CRITICAL
    }
    level = levels.get(level_name.upper(), logging.INFO)
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)
    logger.info(f"Уровень логирования изменен на: {level_name}")


def read_config_file(path, encodings):
    """
    Читает YAML файл сценария

    Args:
        path: путь к файлу
        encodings: список кодировок для попытки чтения

    Returns:
        dict: содержимое файла

    Raises:
        ConfigParseError: файл не читается ни в одной кодировке или не является
            YAML словарем
    """
    text = None
    last_error = None

    # Пытаемся прочитать файл с различными кодировками
    for encoding in encodings:
        try:
            with open(path, 'r', encoding=encoding) as f:
                text = f.read()
            logger.info(f"Файл {path} прочитан с кодировкой: {encoding}")
            break
        except UnicodeDecodeError as e:
            logger.warning(f"Ошибка чтения с кодировкой {encoding}: {str(e)}")
            last_error = e
            continue
        except OSError as e:
            raise ConfigParseError(f"Не удалось открыть файл {path}: {e}") from e

    if text is None:
        raise ConfigParseError(f"Не удалось прочитать файл {path}: {last_error}")

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigParseError(f"Ошибка разбора YAML в {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigParseError(f"Файл {path} должен содержать словарь параметров")
    return data


def validate_config_keys(config, required_keys):
    """
    Проверяет наличие всех обязательных ключей

    Args:
        config: словарь параметров
        required_keys: список обязательных ключей

    Returns:
        tuple: (is_valid, missing_keys)
    """
    missing_keys = [key for key in required_keys if key not in config or config[key] is None]
    return not missing_keys, missing_keys


def check_critical_values(config, positive_keys, finite_keys=()):
    """
    Проверяет критические значения параметров

    Args:
        config: словарь параметров
        positive_keys: ключи, значения которых должны быть положительными числами
        finite_keys: ключи, значения которых должны быть конечными числами

    Returns:
        list: описания нарушений (пустой список, если данные корректны)
    """
    problems = []
    for key in list(positive_keys) + list(finite_keys):
        if config.get(key) is None:
            continue
        value = config[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"'{key}' должно быть числом, получено {value!r}")
            continue
        if not math.isfinite(value):
            problems.append(f"'{key}' должно быть конечным, получено {value}")
            continue
        if key in positive_keys and value <= 0:
            problems.append(f"'{key}' должно быть положительным, получено {value}")

    for problem in problems:
        logger.error(f"Некорректное значение: {problem}")
    return problems
