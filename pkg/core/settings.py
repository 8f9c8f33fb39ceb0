"""
threewave settings.

Every numerical tolerance and default used across the apps lives here so that a
run can be tuned from the environment (or a local ``.env`` file) without code
changes. Values are read once at import time.

See .env.example for the full list of variables.
"""

from pathlib import Path
from os import getenv
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

VERSION = "0.3.0"


# Wave functions
# Absolute tolerance on |sum |alpha_i|^2 - 1|.

NORM_TOLERANCE = float(getenv("THREEWAVE_NORM_TOLERANCE", "1e-9"))

# Relative tolerance used when checking <s2>, <s3> against the subspace labels.
CONSERVATION_TOLERANCE = float(getenv("THREEWAVE_CONSERVATION_TOLERANCE", "1e-10"))


# Time integration

RK4_NORM_CHECK = float(getenv("THREEWAVE_RK4_NORM_CHECK", "1e-8"))

# rk4 step is min(RK4_DT_SCALE / max(h_i), RK4_DT_MAX)
RK4_DT_SCALE = float(getenv("THREEWAVE_RK4_DT_SCALE", "2e-3"))
RK4_DT_MAX = float(getenv("THREEWAVE_RK4_DT_MAX", "1e-3"))

# classical step is CLASSICAL_DT_SCALE / gamma_C (or CLASSICAL_DT_SCALE when stable)
CLASSICAL_DT_SCALE = float(getenv("THREEWAVE_CLASSICAL_DT_SCALE", "1e-4"))


# Spectral analysis

# Two frequencies are the same when |f1 - f2| <= FREQUENCY_TOLERANCE * max|lambda|
FREQUENCY_TOLERANCE = float(getenv("THREEWAVE_FREQUENCY_TOLERANCE", "1e-6"))

# Lines below LINE_PRUNE * max|weight| are dropped from reports
LINE_PRUNE = float(getenv("THREEWAVE_LINE_PRUNE", "1e-12"))

# Fidelity samples per fastest phase period 2*pi/max|lambda|
RECURRENCE_SAMPLES = int(getenv("THREEWAVE_RECURRENCE_SAMPLES", "20"))

LINEAR_SPACING_THRESHOLD = float(getenv("THREEWAVE_LINEAR_SPACING", "1e-3"))


# Experiments

PROBABILITY_WARN_DIMENSION = int(getenv("THREEWAVE_PROBABILITY_WARN_DIMENSION", "256"))

OUTPUT_DIR = Path(getenv("THREEWAVE_OUTPUT_DIR", str(BASE_DIR / "out")))

JOBS = int(getenv("THREEWAVE_JOBS", "1"))

PRESETS_DIR = BASE_DIR / "apps" / "experiments" / "presets"

# Reserved for randomized test utilities; the library itself is deterministic.
SEED = int(getenv("THREEWAVE_SEED", "20240229"))


# Logging

LOG_LEVEL = getenv("THREEWAVE_LOG_LEVEL", "WARNING").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "default": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "default",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "apps": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
        "core": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
        "manage": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
    },
}
