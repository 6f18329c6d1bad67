import os
from functools import lru_cache

from src.app.core import config
from src.app.utils.logger import logger

USE_CACHED_SETTINGS = os.getenv("USE_CACHED_SETTINGS", "True") == "True"
logger = logger(__name__)


@lru_cache()
def get_cached_settings() -> config.Settings:
    return config.Settings()


def get_settings() -> config.Settings:
    """Returns the laboratory settings, cached unless USE_CACHED_SETTINGS=False"""

    if USE_CACHED_SETTINGS:
        logger.debug("cached_setting=true")
        return get_cached_settings()
    else:
        return config.Settings()
