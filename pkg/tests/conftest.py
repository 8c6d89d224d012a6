import os
import shutil
from pathlib import Path

import numpy as np
import pytest


@pytest.fixture()
def test_data_dir():
    return Path(__file__).parent / "test-data-tmp"


@pytest.fixture(autouse=True)
def cleanup_test_data(test_data_dir):
    yield
    shutil.rmtree(test_data_dir, ignore_errors=True)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240229)


@pytest.fixture(scope="session")
def ptbxl_dir():
    path = os.environ.get("PTBXL_DIR")
    if not path:
        pytest.skip("PTBXL_DIR is not set")
    return Path(path)
