import math
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from dephasing.circular import Uniform, VonMises, WrappedCauchy, WrappedNormal

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"

# sqrt(kappa) = ln 2 gives truncation entries t = 1/2, 1/4, ...
KAPPA_HALF = math.log(2) ** 2
# sqrt(kappa) = ln(2)/2 gives a capacity of exactly one bit
KAPPA_ONE_BIT = (math.log(2) / 2) ** 2

FAMILY_SAMPLES = [
    WrappedNormal(0.1),
    WrappedNormal(1.0),
    WrappedNormal(5.0),
    VonMises(0.2),
    VonMises(1.0),
    VonMises(5.0),
    WrappedCauchy(0.1),
    WrappedCauchy(1.0),
    WrappedCauchy(5.0),
]


@pytest.fixture(params=FAMILY_SAMPLES, ids=repr)
def family_density(request):
    return request.param


@pytest.fixture(params=FAMILY_SAMPLES + [Uniform()], ids=repr)
def any_single_density(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS.values()):
            terminalreporter.write_line(line)
