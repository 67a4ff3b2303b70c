"""Shared fixtures and hypothesis configuration."""
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=20, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

from garmentwarp.rasters import BinaryMask, DensePoseMap, RgbImage


def random_densepose(rng: np.random.Generator, width: int, height: int, max_part: int = 24) -> DensePoseMap:
    """A random valid map; roughly half the pixels are background."""
    i = rng.integers(0, max_part + 1, size=(height, width))
    u = rng.random((height, width), dtype=np.float32)
    v = rng.random((height, width), dtype=np.float32)
    return DensePoseMap(i, u, v)


def random_mask(rng: np.random.Generator, width: int, height: int, p: float = 0.5) -> BinaryMask:
    return BinaryMask(rng.random((height, width)) < p)


def random_image(rng: np.random.Generator, width: int, height: int) -> RgbImage:
    return RgbImage(rng.random((height, width, 3), dtype=np.float32))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
