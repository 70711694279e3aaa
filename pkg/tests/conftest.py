import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from twfront.model import reference_problem
from twfront.shooting import find_c_star

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def ref():
    return reference_problem()


@pytest.fixture(scope="session")
def ref_wave(ref):
    return find_c_star(ref)


@pytest.fixture(scope="session")
def degenerate():
    return reference_problem(alpha=1.0)


@pytest.fixture(scope="session")
def degenerate_wave(degenerate):
    return find_c_star(degenerate)


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS
