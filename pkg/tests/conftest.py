import pathlib

import numpy as np
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]
STANDARD_DIR = ROOT / "data" / "standard"
STANDARD_IDS = ("lena", "cameraman", "peppers", "parrot", "house")

ACCEPTANCE_LINES = []


def standard_image_path(name):
    for ext in (".png", ".pgm"):
        p = STANDARD_DIR / f"{name}{ext}"
        if p.exists():
            return p
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ramp3():
    return np.arange(1.0, 10.0).reshape(3, 3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
