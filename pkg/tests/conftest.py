import pytest
from hypothesis import HealthCheck, settings

from distdlog import dist, numtheory

settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def instance():
    """The (N=11, a=3, b=9) instance: r = 5, L = 4, exponent 2."""
    return numtheory.validate_instance(11, 3, 9)


@pytest.fixture(scope="session")
def small_instance():
    """The (N=7, a=2, b=4) instance: r = 3, L = 3, exponent 2."""
    return numtheory.validate_instance(7, 2, 4)


@pytest.fixture(scope="session")
def acceptance_plan(instance):
    return dist.make_plan(instance, k=2, h=2, epsilon="0.25", epsilon_prime="0.2")


@pytest.fixture(scope="session")
def small_plan(small_instance):
    return dist.make_plan(small_instance, k=2, h=2, epsilon="0.5", epsilon_prime="0.45")
