import numpy as np
import pytest

from multiras import MarginSet, Tensor


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def positive_tensor(rng, shape, low=0.5, high=2.0, names=None):
    return Tensor(rng.uniform(low, high, shape), names)


def lognormal_tensor(rng, shape, sigma=1.0):
    return Tensor(rng.lognormal(0.0, sigma, shape))


def feasible_instance(rng, shape, sigma=1.0):
    """(m, margins) with margins taken from a second positive tensor.

    A strictly positive start tensor is feasible for any compatible
    positive margins, so these instances always converge.
    """
    target = lognormal_tensor(rng, shape, sigma)
    m = positive_tensor(rng, shape)
    return m, MarginSet.from_tensor(target)
