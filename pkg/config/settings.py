from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is served over HTTP
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-this-in-production')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third party apps
    'rest_framework',

    # Local apps
    'experiments',
]

# The harness keeps its results in files, no database is configured
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'splines': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
        'experiments': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        },
    },
}

# Spline smoothing defaults, overridable from the environment or .env
NNSPLINE = {
    'DEGREE': config('NNSPLINE_DEGREE', default=3, cast=int),
    'LAMBDA': config('NNSPLINE_LAMBDA', default=1.0 / 250.0, cast=float),
    'EPSILON': config('NNSPLINE_EPSILON', default=0.0, cast=float),
    'MAX_CP_ITERATIONS': config('NNSPLINE_MAX_CP_ITERATIONS', default=500, cast=int),
    'GRID_POINTS': config('NNSPLINE_GRID_POINTS', default=10000, cast=int),
    'ROOT_STRATEGY': config('NNSPLINE_ROOT_STRATEGY', default='closed_form'),
    'QP_TOLERANCE': config('NNSPLINE_QP_TOLERANCE', default=1e-9, cast=float),
    'QP_MAX_ITERATIONS': config('NNSPLINE_QP_MAX_ITERATIONS', default=100, cast=int),
    'SHIFT_NEGATIVE': config('NNSPLINE_SHIFT_NEGATIVE', default=False, cast=bool),
    'METHODS': config('NNSPLINE_METHODS', default='sufficient_qp,cutting_plane'),
    'OUTPUT_DIR': config('NNSPLINE_OUTPUT_DIR', default='results'),
    'WORKERS': config('NNSPLINE_WORKERS', default=1, cast=int),
}
