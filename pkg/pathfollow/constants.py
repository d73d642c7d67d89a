# Константы приложения
import math

# Ускорение свободного падения (м/с^2)
GRAVITY = 9.80665

# Пороги вырождения
EPS_FIELD_FACTOR = 1e-9          # eps_field = EPS_FIELD_FACTOR * grad_scale
EPS_SPEED = 1e-6                 # м/с
EPS_BETA = math.cos(math.radians(80.0))
UNIT_NORM_TOLERANCE = 1e-9
HESSIAN_SYMMETRY_RTOL = 1e-12

# Стандартные значения сценария
DEFAULT_BANK_LIMIT_DEG = 45.0
DEFAULT_PITCH_DEG = 0.0
DEFAULT_CONTROLLER_RATE_HZ = 60.0
DEFAULT_INTEGRATION_RATE_HZ = 600.0
DEFAULT_DURATION_S = 120.0
DEFAULT_FIELD_RESOLUTION = 41

# Допуски установления
DEFAULT_SETTLE_TOLERANCE = 0.05          # безразмерная ошибка эллипса
DEFAULT_METRIC_SETTLE_TOLERANCE = 1.0    # м, для прямой
DEFAULT_V2_TOLERANCE = 1e-4              # допустимый рост V2 на шаг, в единицах dt

# Проверка производных
DEFAULT_FD_STEP = 1e-5
DEFAULT_FD_PROBES = 1000
DEFAULT_FD_TOLERANCE = 1e-6
DEFAULT_REGULARITY_SAMPLES = 2000
DEFAULT_TUNE_SAMPLES = 20000
DEFAULT_SEED = 0

# Регулярные полосы стандартных кривых
ELLIPSE_C_STAR = 6.0
ELLIPSE_C_STAR_INNER = 0.5
CIRCLE_INNER_FRACTION = 0.75     # c_star_inner = 0.75 * r^2

# Обязательные ключи сценария
SCENARIO_REQUIRED_KEYS = [
    'name',
    'curve',
    'airspeed_mps',
    'k_e',
    'k_d',
    'initial_x_m',
    'initial_y_m',
    'initial_yaw_deg',
    'duration_s'
]

CURVE_REQUIRED_KEYS = {
    'line': ['point_x_m', 'point_y_m', 'direction_angle_deg'],
    'circle': ['center_x_m', 'center_y_m', 'radius_m'],
    'ellipse': ['center_x_m', 'center_y_m', 'semi_axis_a_m', 'semi_axis_b_m', 'alpha_deg'],
}

WIND_KINDS = ['constant', 'gust']

# Формат CSV
TRAJECTORY_COLUMNS = [
    't', 'px', 'py', 'psi', 'vx', 'vy', 'e', 'V1', 'V2',
    'u_raw', 'u_clamped', 'chi_dot_d', 'beta', 'phi_cmd', 'align_err'
]
FIELD_COLUMNS = ['x', 'y', 'ux', 'uy', 'degenerate']
CSV_FLOAT_FORMAT = '%.17g'

# Имена выходных файлов
TRAJECTORY_FILE = 'trajectory.csv'
REPORT_TEXT_FILE = 'report.txt'
REPORT_CSV_FILE = 'report.csv'
PATH_DXF_FILE = 'path.dxf'
FIELD_FILE = 'field.csv'

# Коды завершения
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_PARSE = 3
EXIT_CONFIG_VALIDATION = 4
EXIT_SINGULARITY = 5

# Переменная окружения для корня выходных файлов
OUTPUT_ROOT_ENV = 'PATHFOLLOW_OUTPUT_ROOT'
DEFAULT_OUTPUT_ROOT = 'output'

# Поддерживаемые кодировки
SUPPORTED_ENCODINGS = ['utf-8', 'utf-8-sig', 'windows-1251']
