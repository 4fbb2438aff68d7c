import numpy as np
import pytest
from hypothesis import settings

from bncsim.signal_model import DetectorParams

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def params() -> DetectorParams:
    return DetectorParams.default()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
