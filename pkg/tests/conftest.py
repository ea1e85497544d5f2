from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


@pytest.fixture(scope="session")
def toy_classify_dir() -> Path:
    return DATA / "toy_classify"


@pytest.fixture(scope="session")
def toy_triangle_dir() -> Path:
    return DATA / "toy_triangle"
