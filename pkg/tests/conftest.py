from fractions import Fraction as F

import pytest

from icenvy.core import AdTypesInstance, DiscountCurve, PositionInstance


@pytest.fixture
def alpha3():
    return DiscountCurve((1, F(1, 2), F(1, 5)))


@pytest.fixture
def gsp_instance(alpha3):
    """Bids (10, 8, 5) on (1, 0.5, 0.2), truthful."""
    return PositionInstance.truthful([10, 8, 5], alpha3)


@pytest.fixture
def golden():
    """Three bidders whose discounted bids are (10,9,8), (7,6,4), (4,0,0)."""
    return AdTypesInstance([1, 1, 1], [1, 1, 1], [(10, 9, 8), (7, 6, 4), (4, 0, 0)])


@pytest.fixture
def greedy_pair():
    return AdTypesInstance.truthful(
        [10, 12], [(F("0.9"), F("0.81")), (F("0.7"), F("0.49"))]
    )
