import sys
from pathfollow.config import setup_logging
from pathfollow.cli import main as cli_main


def main():
    """Основная функция запуска приложения"""
    # Настраиваем логирование
    setup_logging()

    # Запускаем командную строку
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
