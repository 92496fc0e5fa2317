import math

import pytest

from bosegp.scattering import PotentialSpec, solve_neumann

A_SQUARE_WELL = 1.0 - math.tanh(1.0)


@pytest.fixture(scope="session")
def well():
    return PotentialSpec.square_well(2.0, 1.0)


@pytest.fixture(scope="session")
def scattering_cache(well):
    """Neumann solutions for the reference well keyed by ``N`` (ell = 1/4, L = 1)."""
    cache = {}

    def get(N):
        if N not in cache:
            cache[N] = solve_neumann(well, 0.25, N, 1.0)
        return cache[N]

    return get


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Mapping ``criterion number -> report line`` shared across the session."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
    n_pass = sum(" PASS " in line for line in lines.values())
    terminalreporter.write_line(f"{n_pass}/{len(lines)} criteria pass")
