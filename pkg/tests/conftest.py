import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from wildblender.chain import Schedule, build_chain
from wildblender.model import reference_params

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

F = Fraction


@pytest.fixture(scope="session")
def ref():
    return reference_params()


@pytest.fixture(scope="session")
def chain10(ref):
    return build_chain(ref, Schedule("physical"), 10, majority_from=None)


@pytest.fixture(scope="session")
def chain30(ref):
    return build_chain(ref, Schedule("physical"), 30, majority_from=None)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    RESULTS = mod.RESULTS
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
