import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCHEMES = ROOT / "schemes"

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def schemes_dir():
    return SCHEMES
