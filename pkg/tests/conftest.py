import numpy as np
import pytest

from conemetric import Cone, FiniteConeSpace, example_space_path, load_space


@pytest.fixture
def example_space():
    return load_space(example_space_path())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def line_space():
    """{0, 1, 2} with |x - y| in the one-dimensional orthant."""
    pts = np.array([0.0, 1.0, 2.0])
    dist = np.abs(pts[:, None] - pts[None, :])[..., None]
    return FiniteConeSpace(("0", "1", "2"), Cone.orthant(1), dist)
