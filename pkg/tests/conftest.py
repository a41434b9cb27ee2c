import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "src" / "owpuzzle" / "data"


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    # keep enumeration caches out of the user's home directory
    os.environ["OWPUZZLE_CACHE"] = str(tmp_path_factory.mktemp("kcache"))
    yield


@pytest.fixture
def data_dir():
    return DATA


def pytest_configure(config):
    sys.path.insert(0, str(Path(__file__).parent))
