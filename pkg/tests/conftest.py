import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from clrwarp import Grid, build_centered_basis

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture(scope="session")
def grid400():
    return Grid(400)


@pytest.fixture(scope="session")
def basis10(grid400):
    return build_centered_basis(10, grid400)


def smooth_pair(rng, grid):
    """Two random three-bump mixtures; smooth and non-constant."""
    from clrwarp.signals import gaussian_mixture

    def one():
        return gaussian_mixture(
            rng.uniform(0.5, 1.5, 3), rng.uniform(0.15, 0.85, 3), rng.uniform(0.05, 0.15, 3), grid
        ).values

    return one(), one()


_VERDICTS_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS_KEY] = []


@pytest.fixture
def verdict(request):
    """Record a one-line PASS/FAIL verdict, echoed in the terminal summary."""
    lines = request.config.stash[_VERDICTS_KEY]

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
