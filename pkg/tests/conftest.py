import numpy as np
import pytest


def random_pd(rng, ell, scale=1.0):
    """Random PD matrix: A A^T / ell + small ridge."""
    a = rng.standard_normal((ell, ell))
    return scale * (a @ a.T / ell + 0.1 * np.eye(ell))


def random_symmetric(rng, ell):
    a = rng.standard_normal((ell, ell))
    return (a + a.T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
