import numpy as np
import pytest

from gibbsprep import thermo


def brute_force_tfim(n, h):
    """TFIM matrix built element by element from bit manipulations."""
    dim = 2**n
    ham = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        ham[idx, idx] -= h * sum(1 - 2 * b for b in bits)
        for i in range(n):
            j = (i + 1) % n
            flipped = idx ^ (1 << (n - 1 - i)) ^ (1 << (n - 1 - j))
            ham[flipped, idx] -= 0.5
    return ham


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def target_n2():
    return thermo.GibbsTarget(thermo.TFIMParams(2, 1.0), 1.0)
