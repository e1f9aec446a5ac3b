import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def qubit(a, b):
    v = np.array([a, b], dtype=complex)
    return v / np.linalg.norm(v)


KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
