import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_step_signal(rng, n=200, levels=(0.0, 5.0), noise=0.0):
    """Two-level step with the boundary at n // 2."""
    half = n // 2
    y = np.concatenate([
        np.full(half, levels[0]),
        np.full(n - half, levels[1]),
    ])
    if noise:
        y = y + rng.normal(0, noise, n)
    return y
