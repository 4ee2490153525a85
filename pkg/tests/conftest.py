import json
from fractions import Fraction

import pytest

from ensembles.core import events as ev
from ensembles.core.space import FiniteDistribution, GeometricDistribution, point_mass


@pytest.fixture
def geom2():
    return GeometricDistribution(Fraction(1, 2))


@pytest.fixture
def three():
    """Finite support {0, 1, 2} with masses 1/2, 1/3, 1/6."""
    return FiniteDistribution({0: Fraction(1, 2), 1: Fraction(1, 3), 2: Fraction(1, 6)})


@pytest.fixture
def holed():
    """Symbol 1 sits inside the support with mass 0."""
    return FiniteDistribution({0: Fraction(1, 2), 1: Fraction(0), 2: Fraction(1, 2)})


@pytest.fixture
def unit_at_three():
    return point_mass(3)


@pytest.fixture
def even():
    return ev.even()


@pytest.fixture
def write_json(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)
    return write


GEOM2_SPEC = {"family": "geometric", "p": "1/2"}
