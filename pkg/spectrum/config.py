"""
Configuration for the two-boson spectrum library.
Quadrature tolerances, scan schedule, oracle grid and worker defaults.
Every value can be overridden from the environment or a project-root .env.
"""
import os
from pathlib import Path

# Load .env from project root
from dotenv import load_dotenv
load_dotenv(Path(__file__).resolve().parent.parent / ".env")


def _env_float(name: str, default: str) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: str) -> int:
    return int(os.environ.get(name, default))


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() in ("1", "true", "yes")


# ─── Torus quadrature ───
QUAD_REL_TOL = _env_float("TWOBOSON_QUAD_REL_TOL", "1e-12")
QUAD_INITIAL_POINTS = _env_int("TWOBOSON_QUAD_INITIAL_POINTS", "64")
QUAD_MAX_DOUBLINGS = _env_int("TWOBOSON_QUAD_MAX_DOUBLINGS", "12")
TRAPEZOID_2D_MAX_POINTS = 2048      # per axis; 2D grids beyond this are not attempted
USE_RABCD_IDENTITIES = _env_bool("TWOBOSON_USE_RABCD", "true")
GREENS_CACHE_SIZE = 4096

# ─── Determinant scan ───
EDGE_OFFSET = _env_float("TWOBOSON_EDGE_OFFSET", "1e-9")
FAR_CUTOFF = _env_float("TWOBOSON_FAR_CUTOFF", "1e-6")
INITIAL_STEP = _env_float("TWOBOSON_INITIAL_STEP", "1e-3")
STEP_GROWTH = _env_float("TWOBOSON_STEP_GROWTH", "1.5")
MAX_STEP = _env_float("TWOBOSON_MAX_STEP", "0.25")
BISECT_TOL = _env_float("TWOBOSON_BISECT_TOL", "1e-12")
TANGENCY_WINDOW = _env_float("TWOBOSON_TANGENCY_WINDOW", "1e-6")
MAX_SCAN_STEPS = 1_000_000
PROXIMITY_FLAG = 1e-6               # roots this close to the edge or each other get flagged

# ─── Region classifier ───
BOUNDARY_REL_TOL = 1e-9
CALIBRATION_SAMPLES = _env_int("TWOBOSON_CALIBRATION_SAMPLES", "20")
CALIBRATION_BOX = 25.0              # half-width of the coupling box sampled per component
INTERIOR_STEP = 0.05                # relative perturbation used by the interior test

# ─── Fiber oracle ───
GRID_L = _env_int("TWOBOSON_GRID_L", "64")
DENSE_CAP = _env_int("TWOBOSON_DENSE_CAP", "10000")
DEGENERACY_TOL = 1e-8
SECTOR_WEIGHT_MIN = 0.99
MARGIN_FLOOR = 1e-8

# ─── Runtime ───
DEFAULT_THREADS = _env_int("TWOBOSON_THREADS", str(os.cpu_count() or 1))
DEFAULT_SEED = _env_int("TWOBOSON_SEED", "2024")
LOG_LEVEL = os.environ.get("TWOBOSON_LOG_LEVEL", "INFO").upper()
