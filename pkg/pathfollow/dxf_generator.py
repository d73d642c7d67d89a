import os.path

from ezdxf.filemanagement import new

from .config import logger
from .curve import ImplicitCurve, trace_zero_level

# Слои чертежа
PATH_LAYER = 'path'
TRAJECTORY_LAYER = 'trajectory'
FIELD_LAYER = 'field'
DEGENERATE_LAYER = 'degenerate'
TITLE_LAYER = 'TITLE'


def create_new_dxf():
    """
    Создает новый DXF документ с настроенными слоями

    Returns:
        tuple: (doc, msp) - DXF документ и modelspace
    """
    doc = new()
    msp = doc.modelspace()

    doc.layers.new(PATH_LAYER, dxfattribs={"color": 3, "linetype": "CONTINUOUS"})
    doc.layers.new(TRAJECTORY_LAYER, dxfattribs={"color": 1})
    doc.layers.new(FIELD_LAYER, dxfattribs={"color": 7})
    doc.layers.new(DEGENERATE_LAYER, dxfattribs={"color": 6})

    # Слой для подписей
    doc.layers.new(TITLE_LAYER, dxfattribs={"color": 2})

    return doc, msp


def add_path(msp, curve: ImplicitCurve, step=1.0, max_points=20000):
    """
    Добавляет нулевой уровень кривой полилинией

    Returns:
        int: число вершин (0, если трассировка не удалась)
    """
    points = trace_zero_level(curve, step=step, max_points=max_points)
    if len(points) < 2:
        logger.warning(f"Не удалось построить нулевой уровень кривой '{curve.name}'")
        return 0
    closed = len(points) > 2 and (points[0] - points[-1]).norm() < 2 * step
    msp.add_lwpolyline([(p.x, p.y) for p in points], close=closed,
                       dxfattribs={'layer': PATH_LAYER})
    return len(points)


def add_trajectory(msp, positions):
    """Добавляет траекторию (последовательность Vec2) полилинией"""
    points = [(p.x, p.y) for p in positions]
    if len(points) < 2:
        return 0
    msp.add_lwpolyline(points, dxfattribs={'layer': TRAJECTORY_LAYER})
    return len(points)


def add_field_grid(msp, grid, arrow_length=None):
    """
    Добавляет направления поля: отрезок из каждого узла сетки,
    вырожденные узлы - точками на отдельном слое

    Args:
        grid: FieldGrid
        arrow_length: длина отрезка; по умолчанию 0.8 шага сетки
    """
    if arrow_length is None:
        dx = (grid.xs[-1] - grid.xs[0]) / (len(grid.xs) - 1)
        dy = (grid.ys[-1] - grid.ys[0]) / (len(grid.ys) - 1)
        arrow_length = 0.8 * min(dx, dy)

    for j, y in enumerate(grid.ys):
        for i, x in enumerate(grid.xs):
            x, y = float(x), float(y)
            if grid.degenerate[j, i]:
                msp.add_point((x, y), dxfattribs={'layer': DEGENERATE_LAYER})
                continue
            end = (x + arrow_length * float(grid.ux[j, i]), y + arrow_length * float(grid.uy[j, i]))
            msp.add_line((x, y), end, dxfattribs={'layer': FIELD_LAYER})


def add_title(msp, text, position, height):
    """Добавляет подпись на слой TITLE"""
    msp.add_text(text, dxfattribs={'layer': TITLE_LAYER, 'height': height, 'insert': position})


def write_dxf(filename, curve: ImplicitCurve, positions=None, grid=None, title=None):
    """
    Сохраняет чертеж с траекторией, полем и подписью

    Args:
        filename: путь к DXF файлу
        curve: желаемая траектория
        positions: положения аппарата (список Vec2) или None
        grid: FieldGrid или None
        title: подпись (по умолчанию имя кривой)

    Returns:
        bool: True если файл записан
    """
    try:
        doc, msp = create_new_dxf()
        add_path(msp, curve)
        if positions:
            add_trajectory(msp, positions)
        if grid is not None:
            add_field_grid(msp, grid)

        xmin, xmax, ymin, ymax = grid_extent(curve, grid)
        add_title(msp, title or curve.name, (xmin, ymax + 0.02 * (ymax - ymin)),
                  0.03 * (ymax - ymin))

        doc.saveas(filename)
        logger.info(f"DXF сохранен: {os.path.basename(filename)}")
        return True
    except Exception as e:
        logger.error(f"Ошибка при сохранении DXF {filename}: {str(e)}")
        import traceback
        logger.error(traceback.format_exc())
        return False


def grid_extent(curve: ImplicitCurve, grid=None):
    """Область чертежа: сетка поля или естественная область кривой"""
    if grid is not None:
        return float(grid.xs[0]), float(grid.xs[-1]), float(grid.ys[0]), float(grid.ys[-1])
    return curve.bbox
