"""
Configuración global y constantes del toolkit.
"""

# ===== PATHS =====
DATA_DIR = "data/raw"
DESK_DATASET_PATH = f"{DATA_DIR}/desk.csv"
DESK_META_PATH = f"{DATA_DIR}/desk_meta.json"
OUTPUT_DIR = "data/processed"

# ===== OUTPUT FILES =====
FORECASTS_FILE = "forecasts.csv"
METRICS_FILE = "metrics.csv"
RANKS_FILE = "ranks.csv"
STATS_FILE = "stats.txt"
MANIFEST_FILE = "manifest.json"
ERROR_LOG_FILE = "strategy_errors.log"
RANKS_CHART_FILE = "ranks.html"
FORECASTS_CHART_FILE = "forecasts.html"

# ===== DATASET =====
DATASET_COLUMNS = ["series_id", "t", "value"]
PARADIGMS = ("DS", "SE")
INPUT_WINDOW_FACTOR = 1.25

# ===== HYPER-PARAMETERS (rangos cerrados) =====
HP_RANGES = {
    "cell_dim": (20, 50),
    "minibatch": (1, 100),
    "epoch_size": (2, 5),
    "max_epochs": (2, 50),
    "layers": (1, 5),
    "noise_std": (1e-4, 8e-4),
    "init_std": (1e-4, 8e-4),
    "l2_weight": (1e-4, 8e-4),
}
INTEGER_HPS = ("cell_dim", "minibatch", "epoch_size", "max_epochs", "layers")

DESK_HYPERPARAMETERS = {
    "cell_dim": 20,
    "minibatch": 20,
    "epoch_size": 2,
    "max_epochs": 10,
    "layers": 2,
    "noise_std": 1e-4,
    "init_std": 1e-4,
    "l2_weight": 1e-4,
}

# ===== NETWORK / OPTIMIZER =====
COCOB_ALPHA = 100.0
COCOB_EPS = 1e-8
FORGET_BIAS = 1.0
DEFAULT_CELL = "lstm"

# ===== AUGMENTATION =====
AUGMENT_METHODS = ("MBB", "DBA", "GRATIS")
DBA_WEIGHTINGS = ("ASD", "AS", "AA")
DEFAULT_PER_SERIES = 10
DEFAULT_DBA_ITERATIONS = 10
DEFAULT_AS_NEIGHBORS = 5
DBA_TOLERANCE = 1e-10
DEFAULT_MAR_COMPONENTS = 4
MAR_COEF_STD = 0.5
MAR_MAX_REDRAWS = 1000
MAR_RANGE = (1.0, 100.0)
MBB_MIN_BLOCK = 8
AUG_SUFFIX = "__aug"

# ===== TRANSFER =====
TL_SCHEMES = ("Dense", "AddDense", "Lstm")
TL_MODES = ("Freeze", "Retrain")
DEFAULT_Q = {"Dense": 1, "AddDense": 2, "Lstm": 1}

# ===== EXPERIMENT =====
DEFAULT_TRAINING_SEEDS = 10
DEFAULT_GENERATOR_SEEDS = 3
DEFAULT_BUDGET = 20
SNAIVE_NAME = "SNaive"

# ===== EVALUATION =====
SMAPE_EPSILON = 0.1
SMAPE_NEAR_ZERO = 0.5
ALPHA = 0.05

# ===== EXIT CODES =====
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
