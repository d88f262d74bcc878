from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from qmult.fields import GF, QQ
from qmult.quiver import QuiverWithMult, kronecker

settings.register_profile("qmult", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qmult")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture
def F2():
    return GF(2)


@pytest.fixture
def F3():
    return GF(3)


@pytest.fixture
def QQf():
    return QQ


@pytest.fixture
def kron23() -> QuiverWithMult:
    return kronecker((2, 3))


@pytest.fixture
def kron22() -> QuiverWithMult:
    return kronecker((2, 2))


def varied_quivers() -> list[QuiverWithMult]:
    """A few small quivers with assorted multiplicities, loops included."""
    return [
        kronecker((2, 3)),
        QuiverWithMult.build(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")], [2, 4, 1]),
        QuiverWithMult.build(["1", "2"], [("a", "1", "1"), ("b", "1", "2")], [2, 2]),
    ]
