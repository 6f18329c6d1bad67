import pytest

from src.app.shared.utils.dependencies import get_cached_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    get_cached_settings.cache_clear()
    yield
    get_cached_settings.cache_clear()
