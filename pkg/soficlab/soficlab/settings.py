"""
Django settings for soficlab project.

soficlab runs as a set of management commands over the ``core`` app; there
are no views or models, so the database and middleware stacks stay minimal.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value not in (None, "") else default


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, "") else default


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY", "soficlab-local-only-key")

DEBUG = os.environ.get("DJANGO_DEBUG", "") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "core",
    "rest_framework",
]

MIDDLEWARE = []


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases
# Nothing is persisted.

DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

REST_FRAMEWORK = {
    # Reports are rendered from plain serializers; no auth layer is involved.
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
    'COERCE_DECIMAL_TO_STRING': False,
}

FIXTURE_DIR = BASE_DIR / 'core' / 'fixtures'

# Spectral computations ('spectral' and 'entropy' sub-commands)
SPECTRAL_TOLERANCE = _env_float('SPECTRAL_TOLERANCE', 1e-12)
SPECTRAL_MAX_ITERATIONS = _env_int('SPECTRAL_MAX_ITERATIONS', 1_000_000)
ENTROPY_TOLERANCE = _env_float('ENTROPY_TOLERANCE', 1e-9)  # condition (iii) of the spectral check

# Monte-Carlo sampling ('estimate' sub-command)
SIMULATION_SEED = _env_int('SIMULATION_SEED', 42)
SIMULATION_PREFIX_LENGTH = _env_int('SIMULATION_PREFIX_LENGTH', 30)
SIMULATION_TRIALS = _env_int('SIMULATION_TRIALS', 100_000)
SIMULATION_WORKERS = _env_int('SIMULATION_WORKERS', 1)
WILSON_Z = _env_float('WILSON_Z', 1.959963984540054)

SOFIC_LOG_LEVEL = os.environ.get('SOFIC_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': SOFIC_LOG_LEVEL,
            'propagate': False,
        },
    },
}
