import numpy as np
import pytest

from sfwm.params import SystemParams


def random_params(rng, **fixed) -> SystemParams:
    """Admissible parameter draw: moderate fields, detunings and decays."""
    def rabi(lo, hi):
        return rng.uniform(lo, hi) * np.exp(1j * rng.uniform(-np.pi, np.pi))

    kw = dict(
        decay_41=rng.uniform(0.5, 2.0), decay_42=rng.uniform(0.5, 2.0),
        decay_31=rng.uniform(0.5, 2.0), decay_32=rng.uniform(0.5, 2.0),
        decay_53=rng.uniform(0.01, 0.2), decay_54=rng.uniform(0.01, 0.2),
        gamma21=rng.uniform(0.01, 0.2),
        omega_p=rabi(0.3, 3.0), omega_c=rabi(0.5, 5.0), omega_d=rabi(0.3, 5.0),
        delta_p=rng.uniform(-10, 10), delta_c=rng.uniform(-3, 3),
        delta_d=rng.uniform(-3, 3), delta_15=rng.uniform(-10, 10),
        density=10 ** rng.uniform(11, 12.5), cross_section=1e-9,
        length=rng.uniform(0.002, 0.02),
    )
    kw.update(fixed)
    return SystemParams(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
