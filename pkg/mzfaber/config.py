import os
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()


def _float(name, default):
    return float(os.getenv(name, default))


# Tolerâncias do núcleo matricial
EIG_RESIDUAL_TOL = _float('MZF_EIG_RESIDUAL_TOL', 1e-8)
CONJUGATE_PAIR_TOL = _float('MZF_CONJUGATE_PAIR_TOL', 1e-8)
HULL_SLACK = _float('MZF_HULL_SLACK', 1e-10)

# Mapa conforme elíptico e modos temporais de Faber
ELLIPSE_PADDING = _float('MZF_ELLIPSE_PADDING', 0.1)
ELLIPSE_AXIS_FLOOR = _float('MZF_ELLIPSE_AXIS_FLOOR', 1e-3)
TAYLOR_LIMIT_THRESHOLD = _float('MZF_TAYLOR_LIMIT_THRESHOLD', 1e-10)

# Expansões espectrais (Lagrange / Newton)
DEGENERATE_GAP = _float('MZF_DEGENERATE_GAP', 1e-8)
CONFLUENT_TOL = _float('MZF_CONFLUENT_TOL', 1e-10)

# Modelo de ondas no anel
PSI_CONDITION_MAX = _float('MZF_PSI_CONDITION_MAX', 1e12)

# Integração da GLE
DEFAULT_DT = _float('MZF_DEFAULT_DT', 1e-3)
DEFAULT_T_FINAL = _float('MZF_DEFAULT_T_FINAL', 10.0)
DEFAULT_OUTPUT_DT = _float('MZF_DEFAULT_OUTPUT_DT', 1e-2)

# Configuração de pastas
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(os.path.dirname(BASE_DIR), 'data')
OUTPUT_ROOT = os.getenv('MZF_OUTPUT_ROOT', os.path.join(DATA_DIR, 'runs'))

# Configuração da aplicação
DEBUG = os.getenv('MZF_DEBUG', 'False').lower() in ('true', '1', 't')
LOG_LEVEL = os.getenv('MZF_LOG_LEVEL', 'DEBUG' if DEBUG else 'INFO').upper()
MAX_WORKERS = int(os.getenv('MZF_MAX_WORKERS', 4))

# Famílias e modelos aceitos nos arquivos de experimento
ALLOWED_FAMILIES = ('dyson', 'faber', 'lagrange', 'newton')
ALLOWED_MODELS = ('chain_bethe', 'chain_er', 'wave_annulus')
ALLOWED_ORACLES = ('matrix_exp', 'analytic_l2', 'monte_carlo')

# Tolerância relativa do `compare` antes de acusar regressão
COMPARE_TOLERANCE = _float('MZF_COMPARE_TOLERANCE', 1e-12)

# Amostras de Monte Carlo quando o experimento não especifica
DEFAULT_MC_SAMPLES = int(os.getenv('MZF_DEFAULT_MC_SAMPLES', 10000))
