"""
Django settings for attributeDictionary project.

The project has no web surface: every entry point is a management command
(see attribute_app/management/commands). The database only backs the run
registry.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: the key only signs nothing here, but Django requires one.
SECRET_KEY = os.environ.get(
    'MMIDICT_SECRET_KEY',
    'django-insecure-attribute-dictionary-local-only'
)

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'attribute_app',
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('MMIDICT_DB', BASE_DIR / 'db.sqlite3'),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# https://docs.djangoproject.com/en/4.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'attribute_app': {
            'handlers': ['console'],
            'level': os.environ.get('MMIDICT_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


def _threads_from_env():
    value = os.environ.get('MMIDICT_THREADS')
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


# Numerical defaults shared by the library and the commands.
MMIDICT = {
    'KSVD_ITERS': 20,
    'KSVD_TOL': 1e-6,
    'OMP_RESIDUAL_TOL': 1e-10,
    'JITTER': 1e-8,
    'TAU': 1e-6,
    'VARIANCE_FLOOR': 1e-12,
    'KMEANS_MAX_ITER': 100,
    'KMEANS_TOL': 1e-8,
    'HISTOGRAM_BINS': 10,
    'SUMMARY_K': 10,
    'KNN': 1,
    'THREADS': _threads_from_env(),
}
