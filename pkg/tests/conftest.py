import numpy as np
import pytest

from gibbs_certify.models import FiniteModel, ThreeComponentModel


@pytest.fixture
def block_diagonal():
    """Support {(0, 0), (1, 1)} with uniform masses."""
    return FiniteModel.from_joint([[0.5, 0.0], [0.0, 0.5]], name="block")


@pytest.fixture
def positive_3x3():
    rng = np.random.default_rng(3)
    return FiniteModel.from_joint(rng.uniform(0.2, 1.0, size=(3, 3)), name="pos3")


@pytest.fixture
def cube():
    return ThreeComponentModel.from_joint(np.ones((2, 2, 2)), name="cube")


def random_three(seed):
    rng = np.random.default_rng(seed)
    return ThreeComponentModel.from_joint(rng.uniform(0.05, 1.0, size=(2, 2, 2)))
