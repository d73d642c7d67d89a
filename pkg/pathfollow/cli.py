"""
Командная строка: run, field, validate, tune.

    python main.py run --config paper_ellipse_wind --config paper_ellipse_calm
    python main.py field --config paper_ellipse_calm --bbox -150 150 -150 150 --resolution 31
    python main.py validate --config paper_ellipse_wind
    python main.py tune --config paper_ellipse_calm --band 6 --wind-max 0
"""
import argparse
import concurrent.futures
import functools
import math
import os
import traceback

import pandas as pd

from .analysis import analyze
from .config import get_output_root, logger
from .constants import (
    CSV_FLOAT_FORMAT,
    DEFAULT_FD_PROBES,
    DEFAULT_FD_STEP,
    DEFAULT_FD_TOLERANCE,
    DEFAULT_REGULARITY_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TUNE_SAMPLES,
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_PARSE,
    EXIT_CONFIG_VALIDATION,
    EXIT_OK,
    EXIT_SINGULARITY,
    FIELD_FILE,
    PATH_DXF_FILE,
    REPORT_CSV_FILE,
    REPORT_TEXT_FILE,
    TRAJECTORY_FILE,
)
from .curve import check_regularity, fd_validate, random_probes
from .dxf_generator import write_dxf
from .errors import ConfigParseError, ConfigValidationError, GuidanceError
from .gvf import tune_check
from .scenario import load_scenario
from .sim import run, sample_field_grid
from .utils import set_log_level

SUMMARY_FILE = 'summary.csv'


def _guarded(func):
    """Переводит исключения конфигурации и наведения в коды завершения"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigParseError as e:
            logger.error(f"Ошибка чтения сценария: {str(e)}")
            return EXIT_CONFIG_PARSE
        except ConfigValidationError as e:
            logger.error(f"Некорректный сценарий: {str(e)}")
            return EXIT_CONFIG_VALIDATION
        except GuidanceError as e:
            logger.error(f"Особенность закона управления: {str(e)}")
            return EXIT_SINGULARITY
    return wrapper


def write_csv(frame, path):
    """CSV с 17 значащими цифрами"""
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def _run_scenario(scenario, output_root, dxf):
    """
    Моделирование одного сценария с записью результатов в отдельный каталог

    Returns:
        tuple: (код завершения, строка отчета или None)
    """
    out_dir = scenario.output_dir(output_root)
    os.makedirs(out_dir, exist_ok=True)
    logger.info(f"Сценарий '{scenario.name}': запуск, результаты в {out_dir}")

    log = run(scenario.sim)
    write_csv(log.to_frame(), os.path.join(out_dir, TRAJECTORY_FILE))

    row = None
    if len(log) >= 3:
        report = analyze(log, tolerance=scenario.settle_tolerance, v2_tolerance=scenario.v2_tolerance)
        with open(os.path.join(out_dir, REPORT_TEXT_FILE), 'w', encoding='utf-8') as f:
            f.write(f"scenario: {scenario.name}\n")
            f.write(report.to_text())
        row = {'scenario': scenario.name, **report.to_row()}
        write_csv(pd.DataFrame([row]), os.path.join(out_dir, REPORT_CSV_FILE))
        print(f"[{scenario.name}]")
        print(report.to_text())
    else:
        logger.warning(f"Сценарий '{scenario.name}': журнал слишком короткий для анализа")

    if dxf:
        write_dxf(os.path.join(out_dir, PATH_DXF_FILE), scenario.sim.curve,
                  positions=[r.p for r in log.records], title=scenario.name)

    if not log.completed:
        logger.error(f"Сценарий '{scenario.name}' прерван: {log.termination_reason}")
        return EXIT_SINGULARITY, row
    return EXIT_OK, row


@_guarded
def cmd_run(config_paths, output_dir=None, dxf=False, workers=None):
    """
    Моделирование сценариев. Все сценарии проверяются до запуска первого;
    независимые сценарии выполняются параллельно.
    """
    if isinstance(config_paths, str):
        config_paths = [config_paths]
    scenarios = [load_scenario(path) for path in config_paths]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigValidationError(f"Имена сценариев повторяются: {', '.join(names)}")

    output_root = output_dir or get_output_root()
    workers = workers or min(len(scenarios), os.cpu_count() or 1)

    results = [None] * len(scenarios)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(_run_scenario, s, output_root, dxf): i for i, s in enumerate(scenarios)}
        for future in concurrent.futures.as_completed(futures):
            index = futures[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"Ошибка в сценарии '{scenarios[index].name}': {str(e)}")
                logger.error(traceback.format_exc())
                results[index] = (EXIT_SINGULARITY if isinstance(e, GuidanceError) else EXIT_CHECK_FAILED, None)

    rows = [row for _, row in results if row is not None]
    if len(scenarios) > 1 and rows:
        os.makedirs(output_root, exist_ok=True)
        write_csv(pd.DataFrame(rows), os.path.join(output_root, SUMMARY_FILE))
    return max(code for code, _ in results)


@_guarded
def cmd_field(config_path, bbox=None, resolution=None, output_path=None, dxf=False):
    """Сетка направлений поля в CSV (x, y, ux, uy, degenerate)"""
    scenario = load_scenario(config_path)
    curve = scenario.sim.curve
    bbox = tuple(bbox) if bbox else (scenario.field_bbox or curve.bbox)
    resolution = resolution or scenario.field_resolution
    if resolution < 2:
        raise ConfigValidationError(f"Разрешение сетки должно быть не меньше 2: {resolution}")
    if not (bbox[1] > bbox[0] and bbox[3] > bbox[2]):
        raise ConfigValidationError(f"Некорректная область: {bbox}")

    grid = sample_field_grid(curve, bbox, resolution, scenario.sim.gains, scenario.sim.direction)
    if output_path is None:
        output_path = os.path.join(scenario.output_dir(get_output_root()), FIELD_FILE)
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    write_csv(grid.to_frame(), output_path)
    logger.info(f"Сетка поля {resolution}x{resolution} сохранена в {output_path}")

    if dxf:
        write_dxf(os.path.splitext(output_path)[0] + '.dxf', curve, grid=grid, title=scenario.name)
    return EXIT_OK


@_guarded
def cmd_validate(config_path, bbox=None, band=None, probes=DEFAULT_FD_PROBES,
                 tolerance=DEFAULT_FD_TOLERANCE, seed=DEFAULT_SEED):
    """Проверка производных центральными разностями и регулярности полосы"""
    scenario = load_scenario(config_path)
    curve = scenario.sim.curve
    bbox = tuple(bbox) if bbox else curve.bbox

    report = fd_validate(curve, random_probes(bbox, probes, seed), DEFAULT_FD_STEP)
    lower, upper = (None, None) if band is None else curve.band_limits(band)
    regularity = check_regularity(curve, lower, upper, DEFAULT_REGULARITY_SAMPLES, bbox, seed)

    derivatives_ok = report.passed(tolerance)
    print(f"curve: {curve.name}")
    print(f"probes: {report.probes}")
    print(f"max_grad_error: {report.max_grad_error:.3e}")
    print(f"max_hessian_error: {report.max_hessian_error:.3e}")
    print(f"max_asymmetry: {report.max_asymmetry:.3e}")
    print(f"nonfinite_points: {len(report.nonfinite_points)}")
    print(f"band: [{regularity.lower}, {regularity.upper}]")
    print(f"min_grad_norm: {regularity.min_grad_norm:.3e}")
    print(f"derivatives: {'ok' if derivatives_ok else 'FAILED'}")
    print(f"regularity: {'ok' if regularity.regular else 'FAILED'}")

    if derivatives_ok and regularity.regular:
        logger.info(f"Кривая '{curve.name}' прошла проверку")
        return EXIT_OK
    logger.error(f"Кривая '{curve.name}' не прошла проверку")
    return EXIT_CHECK_FAILED


@_guarded
def cmd_tune(config_path, bank_limit_deg=None, band_c=None, wind_max=None, alignment=0.0,
             samples=DEFAULT_TUNE_SAMPLES, seed=DEFAULT_SEED):
    """Проверка коэффициентов по предельному крену"""
    scenario = load_scenario(config_path)
    sim = scenario.sim
    curve = sim.curve
    bank_limit = sim.bank_limit if bank_limit_deg is None else math.radians(bank_limit_deg)
    if band_c is None:
        if not math.isfinite(curve.c_star):
            raise ConfigValidationError(f"Для кривой '{curve.name}' полосу нужно задать явно (--band)")
        band_c = curve.c_star
    if wind_max is None:
        wind_max = sim.wind.sup_norm()
    if not 0 < bank_limit < math.pi / 2:
        raise ConfigValidationError(f"Предельный крен должен лежать в (0, 90) градусов: {math.degrees(bank_limit)}")

    try:
        report = tune_check(curve, sim.gains, band_c, sim.max_airspeed(), wind_max, sim.pitch, bank_limit,
                            samples=samples, direction=sim.direction, alignment=alignment, seed=seed)
    except ValueError as e:
        raise ConfigValidationError(str(e)) from e

    worst = report.worst_point
    print(f"max_required_bank_deg: {math.degrees(report.max_required_bank):.4f}")
    print(f"bank_limit_deg: {math.degrees(report.bank_limit):.4f}")
    print(f"worst_point: {'none' if worst is None else f'{worst.x:.3f} {worst.y:.3f}'}")
    print(f"worst_ground_speed_mps: {report.worst_ground_speed:.3f}")
    print(f"samples_used: {report.samples_used}")
    print(f"degenerate_skipped: {report.degenerate_skipped}")
    print(f"satisfied: {'yes' if report.satisfied else 'no'}")
    return EXIT_OK if report.satisfied else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog='pathfollow',
                                     description='Следование по неявной кривой по направляющему векторному полю')
    parser.add_argument('--log-level', dest='log_level', default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Уровень логирования')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', help='Моделирование сценариев')
    run_parser.add_argument('--config', action='append', required=True,
                            help='Файл сценария или имя встроенного сценария (можно повторять)')
    run_parser.add_argument('--out', default=None, help='Корень выходных каталогов')
    run_parser.add_argument('--dxf', action='store_true', help='Сохранить траекторию в DXF')
    run_parser.add_argument('--workers', type=int, default=None, help='Число параллельных сценариев')

    field_parser = subparsers.add_parser('field', help='Сетка направлений поля')
    field_parser.add_argument('--config', required=True)
    field_parser.add_argument('--bbox', type=float, nargs=4, metavar=('XMIN', 'XMAX', 'YMIN', 'YMAX'))
    field_parser.add_argument('--resolution', type=int, default=None)
    field_parser.add_argument('--out', default=None, help='Путь к CSV файлу')
    field_parser.add_argument('--dxf', action='store_true', help='Сохранить поле в DXF рядом с CSV')

    validate_parser = subparsers.add_parser('validate', help='Проверка производных и регулярности')
    validate_parser.add_argument('--config', required=True)
    validate_parser.add_argument('--bbox', type=float, nargs=4, metavar=('XMIN', 'XMAX', 'YMIN', 'YMAX'))
    validate_parser.add_argument('--band', type=float, default=None, help='Полуширина полосы c')

    tune_parser = subparsers.add_parser('tune', help='Проверка коэффициентов по крену')
    tune_parser.add_argument('--config', required=True)
    tune_parser.add_argument('--bank-limit-deg', dest='bank_limit_deg', type=float, default=None)
    tune_parser.add_argument('--band', type=float, default=None, help='Полуширина полосы c')
    tune_parser.add_argument('--wind-max', dest='wind_max', type=float, default=None, help='м/с')
    tune_parser.add_argument('--alignment', type=float, default=0.0,
                             help="Предполагаемая ошибка выравнивания |p^T E p_d| в [0, 1]; "
                                  "по умолчанию 0 (выровненный полет), 1 - наихудший случай")
    tune_parser.add_argument('--samples', type=int, default=DEFAULT_TUNE_SAMPLES)
    return parser


def main(argv=None):
    """Точка входа командной строки; возвращает код завершения"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    if args.command == 'run':
        return cmd_run(args.config, args.out, dxf=args.dxf, workers=args.workers)
    if args.command == 'field':
        return cmd_field(args.config, args.bbox, args.resolution, args.out, dxf=args.dxf)
    if args.command == 'validate':
        return cmd_validate(args.config, bbox=args.bbox, band=args.band)
    if args.command == 'tune':
        return cmd_tune(args.config, args.bank_limit_deg, args.band, args.wind_max,
                        alignment=args.alignment, samples=args.samples)
    parser.error(f"Неизвестная команда {args.command}")
