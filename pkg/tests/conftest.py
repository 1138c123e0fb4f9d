import math

import numpy as np
import pytest

from ccarm import Configuration, default_parameters


@pytest.fixture(scope="session")
def params():
    return default_parameters()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_configs(rng, count, theta_lo=0.05, theta_hi=math.pi - 0.05):
    thetas = rng.uniform(theta_lo, theta_hi, size=count)
    deltas = rng.uniform(-math.pi, math.pi, size=count)
    return [Configuration(float(t), float(d)) for t, d in zip(thetas, deltas)]
