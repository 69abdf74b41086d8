import math

import pytest

from borel_stokes import HEAT, CauchyDatum, Equation, QuadratureSpec

Q3 = Equation(1, 3)


@pytest.fixture
def heat():
    return HEAT


@pytest.fixture
def q3():
    return Q3


@pytest.fixture
def pole1():
    """1/(z - 1)."""
    return CauchyDatum.simple_pole(1.0)


@pytest.fixture
def quad():
    return QuadratureSpec()


def heat_jump_exact(t: float, z0: complex = 1.0, z: complex = 0.0) -> complex:
    """-i sqrt(pi/t) exp(-(z0 - z)^2/(4t)) for a simple pole with residue 1, real t > 0."""
    return -1j * math.sqrt(math.pi / t) * complex(math.e) ** (-((z0 - z) ** 2) / (4 * t))
