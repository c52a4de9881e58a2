import pytest

from heckespan.config import PACKAGE_FIXTURES, RunConfig
from heckespan.modforms.sources import DefaultCuspSource


@pytest.fixture(scope="session")
def config(tmp_path_factory):
    return RunConfig(cache_dir=tmp_path_factory.mktemp("cache"), fixtures_dir=PACKAGE_FIXTURES)


@pytest.fixture(scope="session")
def src(config):
    return DefaultCuspSource(config)


def trial_division_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p**0.5) + 1))]


def naive_delta(prec):
    """q prod (1 - q^n)^24 by repeated polynomial multiplication."""
    c = [0] * (prec + 1)
    c[1] = 1 if prec >= 1 else 0
    for n in range(1, prec + 1):
        for _ in range(24):
            for i in range(prec, n - 1, -1):
                c[i] -= c[i - n]
    return c


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
