import os

import pytest
from hypothesis import HealthCheck, settings

from cuspcurrents.fuchsian import preset_gamma2

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", "60")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def P():
    return preset_gamma2()
