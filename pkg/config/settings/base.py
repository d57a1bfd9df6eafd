# ruff: noqa: ERA001, E501
"""Base settings to build other settings files upon."""


from pathlib import Path

import environ

BASE_DIR = Path(__file__).resolve(strict=True).parent.parent.parent
# addressengine/
APPS_DIR = BASE_DIR / "addressengine"
env = environ.Env()

READ_DOT_ENV_FILE = env.bool("DJANGO_READ_DOT_ENV_FILE", default=False)
if READ_DOT_ENV_FILE:
    # OS environment variables take precedence over variables from .env
    env.read_env(str(BASE_DIR / ".env"))

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = env.bool("DJANGO_DEBUG", False)
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
# Nothing here is served over HTTP; the key only satisfies Django's checks.
SECRET_KEY = env("DJANGO_SECRET_KEY", default="addressengine-desk-tool")
TIME_ZONE = "GMT"
# https://docs.djangoproject.com/en/dev/ref/settings/#language-code
LANGUAGE_CODE = "en-us"
# https://docs.djangoproject.com/en/dev/ref/settings/#use-i18n
USE_I18N = False
# https://docs.djangoproject.com/en/dev/ref/settings/#use-tz
USE_TZ = True

# DATABASES
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#databases
# Run records live in a local SQLite file unless DATABASE_URL says otherwise.
DATABASES = {
    "default": env.db(
        "DATABASE_URL",
        default=f"sqlite:///{BASE_DIR / 'addressengine.sqlite3'}",
    ),
}
# https://docs.djangoproject.com/en/stable/ref/settings/#std:setting-DEFAULT_AUTO_FIELD
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# APPS
# ------------------------------------------------------------------------------
DJANGO_APPS = [
    "django.contrib.contenttypes",
]
THIRD_PARTY_APPS = [
    "huey.contrib.djhuey",
]

LOCAL_APPS = [
    "addressengine.runs",
]
# https://docs.djangoproject.com/en/dev/ref/settings/#installed-apps
INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# LOGGING
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#logging
# See https://docs.djangoproject.com/en/dev/topics/logging for
# more details on how to customize your logging configuration.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(module)s %(process)d %(thread)d %(message)s",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {"level": "INFO", "handlers": ["console"]},
    "loggers": {
        "addressengine.engine": {
            "level": env("ADDRESSENGINE_ENGINE_LOG_LEVEL", default="INFO"),
        },
    },
}

REDIS_URL = env("REDIS_URL", default="redis://localhost:6379/0")

# Huey: background task queue for batch runs
# https://huey.readthedocs.io/en/latest/django.html
HUEY = {
    "huey_class": "huey.RedisHuey",
    "url": REDIS_URL,
    "immediate": env.bool("HUEY_IMMEDIATE", default=False),
    "results": True,
    "store_none": False,
    "consumer": {
        "workers": env.int("HUEY_WORKERS", default=2),
        "worker_type": "thread",
    },
}

# AddressEngine
# ------------------------------------------------------------------------------
# Defaults for TimingConfig.from_settings(); command-line flags override them.
ADDRESSENGINE_CLOCK_HZ = env.int("ADDRESSENGINE_CLOCK_HZ", default=66_000_000)
ADDRESSENGINE_STRIP_LINES = env.int("ADDRESSENGINE_STRIP_LINES", default=16)
ADDRESSENGINE_IIM_LINES = env.int("ADDRESSENGINE_IIM_LINES", default=16)
ADDRESSENGINE_OIM_LINES = env.int("ADDRESSENGINE_OIM_LINES", default=16)
ADDRESSENGINE_RESULT_SWITCH_FRACTION = env.float("ADDRESSENGINE_RESULT_SWITCH_FRACTION", default=0.25)
ADDRESSENGINE_INTER_POLICY = env("ADDRESSENGINE_INTER_POLICY", default="streamed")
# Where --trace writes access traces when given a bare file name.
ADDRESSENGINE_TRACE_DIR = env("ADDRESSENGINE_TRACE_DIR", default=str(BASE_DIR / "traces"))
