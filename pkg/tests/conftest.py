import pytest

from etstir.mesh import Geometry, build_grid


@pytest.fixture(scope="session")
def default_grid():
    return build_grid(Geometry(), 256, 96)


@pytest.fixture(scope="session")
def coarse_grid():
    return build_grid(Geometry(), 128, 64)


@pytest.fixture(scope="session")
def empty_grid():
    return build_grid(Geometry(cantilever_mode="none"), 128, 48)


_CASES = {}


def cached_case(config):
    """Run each distinct configuration once per test session."""
    from dataclasses import replace

    from etstir.driver import run_case

    key = replace(config, label="")
    if key not in _CASES:
        _CASES[key] = run_case(config, keep_fields=True)
    return _CASES[key]


def all_cached_cases():
    return list(_CASES.values())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def case_runner():
    return cached_case
