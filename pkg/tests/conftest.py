import numpy as np
import pytest


@pytest.fixture(autouse=True)
def _seed_numpy_legacy():
    # Some helpers use the legacy global RNG; keep every test reproducible.
    np.random.seed(0)
