# app/config.py
import os
from pathlib import Path

from dotenv import load_dotenv
load_dotenv()  # loads .env in dev; CI and batch runs use plain env vars

# Repository root (benchmarks/ and tech/ live next to app/)
ROOT_DIR = Path(__file__).resolve().parent.parent

# Inputs
TECH_FILE = Path(os.getenv("NVC_TECH_FILE", str(ROOT_DIR / "tech" / "default.tech")))
BENCH_DIR = Path(os.getenv("NVC_BENCH_DIR", str(ROOT_DIR / "benchmarks")))

# Outputs
OUTPUT_DIR = Path(os.getenv("NVC_OUTPUT_DIR", "out"))

# Clustering
MAX_LEAVES = int(os.getenv("NVC_MAX_LEAVES", "5"))
ENABLE_OUTPUT_INVERSION = os.getenv("NVC_ENABLE_OUTPUT_INVERSION", "true").lower() == "true"

# Monte-Carlo defaults (all randomness still flows from --seed)
DEFAULT_SEED = int(os.getenv("NVC_DEFAULT_SEED", "0"))
DEFAULT_TRIALS = int(os.getenv("NVC_DEFAULT_TRIALS", "1000"))
DEFAULT_HORIZON_NS = float(os.getenv("NVC_DEFAULT_HORIZON_NS", "1e9"))
DEFAULT_JITTER = float(os.getenv("NVC_DEFAULT_JITTER", "0.2"))
MAX_JOBS = int(os.getenv("NVC_MAX_JOBS", "1"))
TRIAL_BATCH_SIZE = int(os.getenv("NVC_TRIAL_BATCH_SIZE", "500"))

# Harvester defaults: 470 nF store capacitor, 4.5 V on / 2 V off thresholds
HARVEST_CAPACITANCE_NF = float(os.getenv("NVC_CAPACITANCE_NF", "470"))
HARVEST_CURRENT_UA = float(os.getenv("NVC_HARVEST_UA", "10"))
LOAD_CURRENT_UA = float(os.getenv("NVC_LOAD_UA", "110"))
HARVEST_V_ON = float(os.getenv("NVC_V_ON", "4.5"))
HARVEST_V_OFF = float(os.getenv("NVC_V_OFF", "2.0"))
HARVEST_V_MAX = float(os.getenv("NVC_V_MAX", "5.0"))

# Logging
LOG_LEVEL = os.getenv("NVC_LOG_LEVEL", "INFO").upper()

# HTTP surface
ALLOW_ORIGINS = os.getenv("NVC_ALLOW_ORIGINS", "*")
