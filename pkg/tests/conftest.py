import numpy as np
import pytest

from gammaclust.core import DataSet, GaussianComponent, MixtureSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture
def two_far_mixture() -> MixtureSpec:
    """Two well-separated univariate unit normals (centers 0 and 10)."""
    return MixtureSpec(
        (
            GaussianComponent(np.array([0.0]), np.eye(1)),
            GaussianComponent(np.array([10.0]), np.eye(1)),
        ),
        np.array([0.5, 0.5]),
    )


def random_blob(rng: np.random.Generator, n: int, p: int, spread: float = 1.0) -> DataSet:
    return DataSet(rng.normal(scale=spread, size=(n, p)))
