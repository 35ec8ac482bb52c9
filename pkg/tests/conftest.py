import numpy as np
import pytest

from kerrh.kerr_background import Background


def batch(a: float, m: float = 1.0) -> Background:
    """A small off-axis, off-horizon sample of points for spin ``a``."""
    r = np.array([2.6, 3.5, 6.0, 14.0]) * m
    th = np.array([0.4, 1.0, 1.9, 2.7])
    R, TH = np.meshgrid(r, th, indexing="ij")
    return Background(m, a, R.ravel(), TH.ravel())


@pytest.fixture(params=[0.0, 0.3, 0.95], ids=lambda a: f"a={a}")
def bg(request) -> Background:
    return batch(request.param)


@pytest.fixture
def bg_kerr() -> Background:
    return batch(0.7)


@pytest.fixture
def bg_schw() -> Background:
    return batch(0.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
