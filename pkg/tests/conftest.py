import numpy as np
import pytest

from saddlekit import bilinear_instance


@pytest.fixture
def b1():
    """Tiny bilinear instance with a hand-checkable saddle (0.5, 0.2)/(0.5, 0.4)."""
    return bilinear_instance(np.diag([1.0, 2.0]), np.array([1.0, 1.0]))


@pytest.fixture
def b1_problem(b1):
    return b1.problem()
