"""
Django settings for qkdlc_project project.

The project has no web surface: Django supplies configuration, logging and the
management-command runner for the qkdlc numerical toolkit.
"""
import os
from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='django-insecure-qkdlc-local-only')

DEBUG = config("APP_DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="",
                       cast=lambda v: [s.strip() for s in v.split(",") if s.strip()])

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'qkdlc',
]

# No persistence: every computation is a pure function of its flags and seeds.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Worker cap for parallel sweeps (per-distance optimisation, Monte Carlo blocks,
# tomography trials)
QKDLC_THREADS = config('QKDLC_THREADS', default=os.cpu_count() or 1, cast=int)

QKDLC_OPTIMIZER = {
    'SEARCH_LO': config('QKDLC_SEARCH_LO', default=1e-3, cast=float),
    'SEARCH_HI': config('QKDLC_SEARCH_HI', default=1e4, cast=float),
    'GRID_POINTS': config('QKDLC_GRID_POINTS', default=200, cast=int),
    'REL_TOL': config('QKDLC_REL_TOL', default=1e-6, cast=float),
}

QKDLC_TOMOGRAPHY = {
    'WINDOW_BINS': config('QKDLC_WINDOW_BINS', default=5, cast=int),
    'MAD_FACTOR': config('QKDLC_MAD_FACTOR', default=5.0, cast=float),
    'MIN_LEAK_MAGNITUDE': config('QKDLC_MIN_LEAK_MAGNITUDE', default=1e-3, cast=float),
}

QKDLC_MONTECARLO = {
    'BLOCK_SIZE': config('QKDLC_BLOCK_SIZE', default=65536, cast=int),
    'Z_LIMIT': config('QKDLC_Z_LIMIT', default=4.0, cast=float),
}

LOG_LEVEL = config('QKDLC_LOG_LEVEL', default='DEBUG' if DEBUG else 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} [{levelname}] {name} - {message}',
            'style': '{',
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
        'simple': {
            'format': '[{levelname}] {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
            'level': LOG_LEVEL,
        },
        'command_console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
            'level': 'WARNING',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'qkdlc': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'qkdlc.management': {
            'handlers': ['command_console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}
