import pytest

from unitfold.circuit import preset_topology
from unitfold.compiler import DEFAULT_CONFIG, find_unity


@pytest.fixture(scope="session")
def chain3():
    return preset_topology("chain3")


@pytest.fixture(scope="session")
def chain3_unity(chain3):
    """One unity search shared by the whole session (seed 7)."""
    return find_unity(chain3, DEFAULT_CONFIG.with_(seed=7))
