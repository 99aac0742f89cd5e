"""Test configuration and fixtures."""
import os

import pytest
import structlog
from hypothesis import HealthCheck, settings

from cnetkat.domain.models import Universe
from cnetkat.services.case_studies import load_program
from cnetkat.services.semantics import EvalConfig
from tests.strategies import SMALL, STORE, TINY

settings.register_profile(
    "dev",
    max_examples=15,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile(
    "acceptance",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

# Per-suite example counts under the acceptance profile.
ACCEPTANCE = os.getenv("HYPOTHESIS_PROFILE") == "acceptance"
NETKAT_EXAMPLES = 500 if ACCEPTANCE else 30
POCKA_EXAMPLES = 200 if ACCEPTANCE else 20
NORMAL_FORM_EXAMPLES = 100 if ACCEPTANCE else 15
ROUND_TRIP_EXAMPLES = 1000 if ACCEPTANCE else 50


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep service logging out of captured output."""
    structlog.configure(wrapper_class=structlog.make_filtering_bound_logger(40))
    yield
    structlog.reset_defaults()


@pytest.fixture
def small() -> Universe:
    """Fields sw: 1 2, type: heart spade; variable v: 0 1."""
    return SMALL


@pytest.fixture
def tiny() -> Universe:
    return TINY


@pytest.fixture
def store() -> Universe:
    """Variables v and w, each 0 or 1."""
    return STORE


@pytest.fixture
def exact() -> EvalConfig:
    """No padding and no star unrolling beyond two."""
    return EvalConfig(star_bound=2, pad_bound=0)


@pytest.fixture
def padded() -> EvalConfig:
    return EvalConfig(star_bound=2, pad_bound=1)


@pytest.fixture(scope="session")
def running():
    """The running example ending at switch 4."""
    return load_program("running_sw4.cnk")


@pytest.fixture
def heart(small):
    return small.packet(sw=1, type="heart")


@pytest.fixture
def spade(small):
    return small.packet(sw=1, type="spade")
