from pathlib import Path

import numpy as np
import pytest

from salsmooth.imagery import ImageBuffer, load_image

DATA = Path(__file__).parent / "data"
NATURAL_IMAGES = ("astronaut", "camera", "immunohistochemistry")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, w, h, c=3) -> ImageBuffer:
    return ImageBuffer(rng.integers(0, 256, size=(h, w, c), dtype=np.uint8))


@pytest.fixture(scope="session")
def natural_images() -> dict[str, ImageBuffer]:
    return {name: load_image(DATA / f"{name}.png") for name in NATURAL_IMAGES}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
