import numpy as np
import pytest

from diffattack import InputTensor


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_tensor(rng, shape=(2, 3)) -> InputTensor:
    size = int(np.prod(shape))
    return InputTensor(shape, rng.uniform(0.0, 255.0, size=size))
