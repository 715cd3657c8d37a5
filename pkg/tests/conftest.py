import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morphflight import default_config


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260824)
