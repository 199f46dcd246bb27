import numpy as np
import pytest

from vqdemark import GrayImage, generate_phantom


@pytest.fixture
def noisy_image():
    rng = np.random.default_rng(123)
    return GrayImage(rng.integers(0, 256, size=(24, 31), dtype=np.uint8))


@pytest.fixture
def small_phantom():
    return generate_phantom(64, 64, 32, 32, 10, seed=5)
