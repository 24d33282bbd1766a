import pytest

import varest as vr

from .util import csv_to_population

# Summary statistics of the apple-orchard population
APPLE = dict(
    N=104,
    S_y=11.6694,
    S_x=23029.072,
    rho_yx=0.865,
    beta2y=16.523,
    beta2x=17.516,
    lambda22=14.398,
    C_y=1.866,
    C_x=1.653,
)


@pytest.fixture
def apple_moments() -> vr.PopulationMoments:
    return vr.PopulationMoments.from_summary(n=20, **APPLE)


@pytest.fixture
def toy_population() -> vr.Population:
    """Four units with y and x strongly but not perfectly correlated."""
    return csv_to_population(
        """
        y,x
        1,2
        2,4
        3,7
        4,8
        """
    )


@pytest.fixture
def six_units() -> vr.Population:
    return csv_to_population(
        """
        y,x
        2,1
        4,3
        5,4
        7,6
        8,7
        10,9
        """
    )
