from .base import *  # noqa: F403
from .base import INSTALLED_APPS
from .base import LOGGING
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = True
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="O34AuWArDfTf91UpolxLn50PLNSCLrDNIWXU2hGbgmASu3cRCfFGhGiODreiPXFS",
)

# django-extensions
# ------------------------------------------------------------------------------
# https://django-extensions.readthedocs.io/en/latest/installation_instructions.html#configuration
INSTALLED_APPS += ["django_extensions"]

# LOGGING
# ------------------------------------------------------------------------------
# Schedule events (strip complete, bank switch, ...) are logged at DEBUG.
LOGGING["loggers"]["addressengine.engine"]["level"] = env(  # type: ignore[index]
    "ADDRESSENGINE_ENGINE_LOG_LEVEL",
    default="DEBUG",
)

# Huey: no Redis needed at the desk unless asked for
# ------------------------------------------------------------------------------
HUEY = {
    "huey_class": "huey.MemoryHuey",
    "immediate": env.bool("HUEY_IMMEDIATE", default=True),
}
