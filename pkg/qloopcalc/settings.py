"""
Django settings for the qloopcalc project.

The project has no web surface: Django provides the settings layer, the ORM
for run manifests and the test runner. Library defaults come from QLG_*
environment variables (a local .env file is read first).
"""

from pathlib import Path
import os

import dj_database_url
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-qloopcalc-local-development-key')

DEBUG = os.environ.get('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'shifted',
]

MIDDLEWARE = []


# Database
# Run manifests only; DATABASE_URL overrides the local SQLite file

DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
    )
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Library defaults (CLI flags override them per run)

QLG_THREADS = int(os.environ.get('QLG_THREADS', '1'))
QLG_SEED = int(os.environ.get('QLG_SEED', '20240917'))
QLG_FM_STEP_CAP = int(os.environ.get('QLG_FM_STEP_CAP', '20000'))
QLG_DEFAULT_TRUNC = int(os.environ.get('QLG_DEFAULT_TRUNC', '4'))
QLG_LOG_LEVEL = os.environ.get('QLG_LOG_LEVEL', 'INFO')
