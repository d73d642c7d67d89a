import os
import sys
import logging

from .constants import OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT

# Файл логирования
LOG_FILE = 'pathfollow.log'

# Настройка логирования


def setup_logging(log_file=LOG_FILE, level='INFO'):
    """Настраивает логирование приложения"""
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    logger = logging.getLogger('pathfollow')
    logger.setLevel(getattr(logging, str(level).upper(), logging.INFO))

    # Удаляем все существующие обработчики логов
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    # Добавляем файловый обработчик
    if log_file:
        file_handler = logging.FileHandler(
            log_file, encoding='utf-8', mode='w')
        file_handler.setFormatter(logging.Formatter(log_format))
        logger.addHandler(file_handler)

    # Добавляем консольный обработчик
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(logging.Formatter(log_format))
    logger.addHandler(stream_handler)

    return logger


def get_base_dir():
    """
    Возвращает каталог с ресурсами пакета.

    При запуске из собранного PyInstaller файла ресурсы лежат в sys._MEIPASS.
    """
    if getattr(sys, 'frozen', False):
        # Работаем из EXE
        return os.path.join(
            getattr(sys, '_MEIPASS', os.path.dirname(sys.executable)), 'pathfollow')
    # Работаем из исходников
    return os.path.dirname(os.path.abspath(__file__))


def get_scenarios_dir():
    """Каталог со встроенными сценариями"""
    return os.path.join(get_base_dir(), 'scenarios')


def get_output_root(default=None):
    """
    Корень для выходных файлов.

    Переменная окружения PATHFOLLOW_OUTPUT_ROOT имеет приоритет над default.
    """
    env_value = os.environ.get(OUTPUT_ROOT_ENV)
    if env_value:
        return env_value
    return default if default else DEFAULT_OUTPUT_ROOT


logger = logging.getLogger('pathfollow')
