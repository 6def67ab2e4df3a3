from fractions import Fraction

import pytest

from qlattice.lattice import QParams


@pytest.fixture(scope="session")
def params():
    return QParams(Fraction(1, 2), Fraction(1), Fraction(-1))


@pytest.fixture(scope="session")
def params_q3():
    return QParams(Fraction(1, 3), Fraction(2), Fraction(-1, 2))
