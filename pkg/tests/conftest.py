import numpy as np
import pytest
from hypothesis import settings

from torusct import FreqBox, covering_directions
from torusct.phantoms import random_phantom

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def box22():
    return FreqBox(2, 2)


@pytest.fixture(scope="session")
def D21(box22):
    return covering_directions(2, 1, box22)


def phantom(n, K, seed, **kw):
    return random_phantom(FreqBox(n, K), np.random.default_rng(seed), **kw)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def record(number: int, passed: bool, detail: str):
    ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
