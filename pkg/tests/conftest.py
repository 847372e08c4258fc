import pytest
from hypothesis import HealthCheck, settings

from bellchains import claims
from bellchains.chsh import all_heterosexual_pairs
from bellchains.optimize import Objective, max_biphoton_family

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def verify_report():
    return claims.verify_all(timestamp="2000-01-01T00:00:00Z")


@pytest.fixture(scope="session")
def four_party_biphoton():
    """Biphoton sums over the four pairs with blocks Alice-Bob and Natasha-Ivan."""
    obj = Objective.sum_index(all_heterosexual_pairs(claims.FOUR))
    return {
        "general": max_biphoton_family(obj, [(0, 2), (1, 3)], 4),
        "bell": max_biphoton_family(obj, [(0, 2), (1, 3)], 4, maximally_entangled=True),
        "objective": obj,
    }
