import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from pickands import Family, FamilySpec, comonotone, independence, make_family  # noqa: E402


@pytest.fixture()
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture()
def pi_fn():
    """A = 1 (independence)."""
    return independence()


@pytest.fixture()
def m_fn():
    """A = max(t, 1 - t) (comonotone)."""
    return comonotone()


@pytest.fixture()
def l75():
    return make_family(FamilySpec(Family.L, y=0.75))


@pytest.fixture()
def p28():
    return make_family(FamilySpec(Family.P, y=0.8, x=0.2))
