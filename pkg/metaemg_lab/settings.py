"""
Django settings for metaemg_lab project.

Proyecto de laboratorio para MetaEMG: preprocesamiento de EMG, construcción de
tareas, clasificador de intención, meta-entrenamiento y arnés de experimentos.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'METAEMG_SECRET_KEY',
    'django-insecure-metaemg-lab-only-for-local-experiments',
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('METAEMG_DEBUG', '1') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    #Librerias de terceros
    'graphene_django',
    'django_filters',


    #Nuestras apps
    'dataio',
    'synth',
    'tasks',
    'nn',
    'meta',
    'harness',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'metaemg_lab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'metaemg_lab.wsgi.application'


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'es-pe'

TIME_ZONE = 'America/Lima'

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.2/howto/static-files/

STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# =======================================
# CONFIGURACIÓN DE GRAPHQL CON GRAPHENE
# =======================================

GRAPHENE = {
    'SCHEMA': 'metaemg_lab.schema.schema',
}

# =======================================
# CONFIGURACIÓN DE METAEMG
# =======================================

METAEMG = {
    # Carpeta donde se escriben tablas, registros por tarea y manifiestos
    'RESULTS_DIR': Path(os.environ.get('METAEMG_RESULTS_DIR', BASE_DIR / 'results')),
    # Hilos para gradientes por tarea y generación de corpus (1 = secuencial)
    'WORKERS': int(os.environ.get('METAEMG_WORKERS', '1')),
    # Tamaño de bloque para acumular gradientes por muestra
    'CHUNK_SIZE': 256,
    'LOG_LEVEL': os.environ.get('METAEMG_LOG_LEVEL', 'INFO'),
}

# =======================================
# LOGGING
# =======================================

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
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': METAEMG['LOG_LEVEL'],
            'propagate': False,
        }
        for app in ('dataio', 'synth', 'tasks', 'nn', 'meta', 'harness')
    },
}
