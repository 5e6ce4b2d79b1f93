import numpy as np
import pytest

from ionfridge.fockspace import TruncationPolicy
from ionfridge.states import ModePrep

TWO_PI = 2.0 * np.pi


@pytest.fixture
def thermal_triple():
    """Stock thermal preparation used throughout the relaxation studies."""
    return (ModePrep.thermal_state(0.66),
            ModePrep.thermal_state(4.44),
            ModePrep.thermal_state(2.63))


@pytest.fixture
def small_policy():
    return TruncationPolicy(epsilon=1e-4)
