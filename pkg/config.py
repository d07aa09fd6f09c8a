"""
Centralized configuration management for drift-pqc.
Supports environment variables and sensible defaults.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).parent


def _env_bool(name, default):
    return os.environ.get(name, default).lower() == "true"


class Config:
    """Base configuration with sensible defaults"""
    # Logging
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
    LOG_FORMAT = os.environ.get("LOG_FORMAT", "%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # Reproducibility
    DEFAULT_SEED = int(os.environ.get("DEFAULT_SEED", "7"))
    ARTIFACT_VERSION = "1.0.0"

    # Simulation
    TQ_NOISE_MODE = os.environ.get("TQ_NOISE_MODE", "pair_depolarizing")
    IDLE_DECOHERENCE = _env_bool("IDLE_DECOHERENCE", "False")
    DEFAULT_SHOTS = int(os.environ.get("DEFAULT_SHOTS", "1024"))

    # Numerical tolerances (tests may override)
    ATOL_TRACE = float(os.environ.get("ATOL_TRACE", "1e-9"))
    ATOL_ENTRY = float(os.environ.get("ATOL_ENTRY", "1e-10"))

    # Training
    ITERATIONS = int(os.environ.get("ITERATIONS", "100"))
    LEARNING_RATE = float(os.environ.get("LEARNING_RATE", "0.1"))
    FD_STEP = float(os.environ.get("FD_STEP", "0.01"))
    # 1 keeps every evaluation in the calling thread
    N_JOBS = int(os.environ.get("N_JOBS", "1"))

    # Calibration
    IQR_K = float(os.environ.get("IQR_K", "1.5"))
    GATE_TIME_1Q_NS = float(os.environ.get("GATE_TIME_1Q_NS", "120"))
    GATE_TIME_2Q_NS = float(os.environ.get("GATE_TIME_2Q_NS", "400"))
    SYNTH_DAYS = int(os.environ.get("SYNTH_DAYS", "43"))
    SYNTH_DRIFT = float(os.environ.get("SYNTH_DRIFT", "0.2"))
    FIXTURE_SEED = int(os.environ.get("FIXTURE_SEED", "2019"))

    # Evaluation
    EVAL_OBSERVATIONS = int(os.environ.get("EVAL_OBSERVATIONS", "100"))

    # Fixtures
    FIXTURES_DIR = Path(os.environ.get("FIXTURES_DIR", str(BASE_DIR / "fixtures")))
    DEVICE_JSON = Path(os.environ.get("DEVICE_JSON", str(FIXTURES_DIR / "ibmqx4.json")))
    TOPOLOGIES_JSON = FIXTURES_DIR / "topologies.json"
    IRIS_CSV = Path(os.environ.get("IRIS_CSV", str(FIXTURES_DIR / "iris.csv")))

# Create instance
config = Config()
