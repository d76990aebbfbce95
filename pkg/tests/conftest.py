import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


@pytest.fixture(scope="session")
def heis2():
    # order-8 Heisenberg-type group: x^2 = y^2 = c^2 = e, [y, x] = c
    from nil2.core import PcGroup, PcPresentation

    pres = PcPresentation(
        names=("x", "y", "c"),
        orders=(2, 2, 2),
        power_tails={},
        comm_tails={(1, 0): ((2, 1),)},
    )
    return PcGroup(pres, name="H8")


@pytest.fixture(scope="session")
def guiding_m():
    # x^4 = y^4 = e, [y, x] = c of order 4
    from nil2.core import PcGroup, PcPresentation

    pres = PcPresentation(
        names=("x", "y", "c"),
        orders=(4, 4, 4),
        power_tails={},
        comm_tails={(1, 0): ((2, 1),)},
    )
    return PcGroup(pres, name="M")
