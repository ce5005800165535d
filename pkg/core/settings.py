"""
Django settings for the qspec project.

The project has no database and no web surface: Django provides the settings layer,
the app registry, the management-command CLI and the test runner.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

from pathlib import Path
from decouple import config


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='qspec-local-only')

DEBUG = config('DEBUG', cast=bool, default=False)

ALLOWED_HOSTS = []

# Application definition

PROJECT_APPS = [
    'quaternion_core',
    'qmatrix',
    's_spectrum',
    'spectral_core',
    'functional_calculus',
    'bounded_transform',
    'cli',
]

INSTALLED_APPS = ['rest_framework'] + PROJECT_APPS

# No ORM models anywhere; tests are SimpleTestCase only.
DATABASES = {}

USE_TZ = True
USE_I18N = False


# Numerical defaults (override through the environment or a .env file)

QSPEC_ATOL = config('QSPEC_ATOL', cast=float, default=1e-12)
QSPEC_RTOL = config('QSPEC_RTOL', cast=float, default=1e-10)

# Slice unit fixed whenever a j is needed: "e1" | "e2" | "e3" | "x,y,z"
QSPEC_DEFAULT_J = config('QSPEC_DEFAULT_J', default='e1')

QSPEC_SEED = config('QSPEC_SEED', cast=int, default=42)

# Two chi eigenvalues share a sphere iff |dRe| and |d|Im|| are below g = factor * max(1, ||T||)
QSPEC_GROUPING_RTOL = config('QSPEC_GROUPING_RTOL', cast=float, default=1e-8)

QSPEC_EIG_MAX_ITER = config('QSPEC_EIG_MAX_ITER', cast=int, default=60)
QSPEC_JACOBI_MAX_SWEEPS = config('QSPEC_JACOBI_MAX_SWEEPS', cast=int, default=60)

QSPEC_POLY_DEGREE_CAP = config('QSPEC_POLY_DEGREE_CAP', cast=int, default=256)

QSPEC_VERIFY_TRIALS = config('QSPEC_VERIFY_TRIALS', cast=int, default=20)
QSPEC_VERIFY_MAX_DIM = config('QSPEC_VERIFY_MAX_DIM', cast=int, default=6)

QSPEC_FLOAT_FORMAT = config('QSPEC_FLOAT_FORMAT', default='%.17g')

QSPEC_LOG_LEVEL = config('QSPEC_LOG_LEVEL', default='INFO')


# Logging: app logs to console
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": QSPEC_LOG_LEVEL,
            "propagate": False,
        }
        for app in PROJECT_APPS + ["core"]
    },
}
