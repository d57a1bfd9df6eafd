"""
With these settings, tests run faster.
"""

from .base import *  # noqa: F403
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="F5iW06Ixt8UyNK2ayuvtBpq8UZByCMTGKp8kVHrOJIlpUs9VDgEf8grB50Yxt5QY",
)
# https://docs.djangoproject.com/en/dev/ref/settings/#test-runner
TEST_RUNNER = "django.test.runner.DiscoverRunner"

# DATABASES
# ------------------------------------------------------------------------------
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    },
}

# Huey: run tasks synchronously (immediate mode) during tests
# ------------------------------------------------------------------------------
HUEY = {
    "huey_class": "huey.MemoryHuey",
    "immediate": True,
}

# AddressEngine
# ------------------------------------------------------------------------------
# Tests pin the shipped calibration so a local .env cannot shift the numbers.
ADDRESSENGINE_CLOCK_HZ = 66_000_000
ADDRESSENGINE_STRIP_LINES = 16
ADDRESSENGINE_IIM_LINES = 16
ADDRESSENGINE_OIM_LINES = 16
ADDRESSENGINE_RESULT_SWITCH_FRACTION = 0.25
ADDRESSENGINE_INTER_POLICY = "streamed"
