import numpy as np
import pytest

from setguard.design import SUPERVISOR_DESIGN, design_sets


@pytest.fixture(scope="session")
def sets():
    """Position-only constraint set, the reference design."""
    return design_sets()


@pytest.fixture(scope="session")
def sup_sets():
    """Input-constrained sets used by the bundled supervisor."""
    return design_sets(SUPERVISOR_DESIGN)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
