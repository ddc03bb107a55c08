import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rkhsfactor.kernels import KernelSpec, SampleSet, evaluate
from rkhsfactor.sampling import uniform_disc

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hardy_one_zero():
    """Szego sample on eight seeded points plus the zero 0.5 (last index)."""
    sample = uniform_disc(8, seed=1, radius=0.9, extra=[0.5])
    s = evaluate(KernelSpec.szego(), sample)
    return sample, s


def disc_sample(points) -> SampleSet:
    return SampleSet.from_points(list(points))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion (printed at session end)."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
