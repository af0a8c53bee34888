import warnings

import pytest
from hypothesis import HealthCheck, settings

from shadowlab.errors import EmptyCriticalSet
from shadowlab.maps import SmoothMap, analyze

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def logistic():
    return SmoothMap.logistic(4.0)


@pytest.fixture(scope="session")
def doubling():
    return SmoothMap.doubling(2)


@pytest.fixture(scope="session")
def cubic():
    return SmoothMap.cubic()


@pytest.fixture(scope="session")
def logistic_constants(logistic):
    return analyze(logistic)


@pytest.fixture(scope="session")
def doubling_constants(doubling):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyCriticalSet)
        return analyze(doubling)
