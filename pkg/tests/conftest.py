import numpy as np
import pytest

from pairpop.measures import FitnessParams, SimplexMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_params(rng, L=None, mu=None, threshold_only=False):
    """A random valid FitnessParams instance for property tests."""
    if L is None:
        L = int(rng.integers(1, 6))
    half = np.sort(rng.uniform(0.05, 1.0, size=L))
    K = np.concatenate([half, [1.0], half[::-1]])
    if threshold_only or rng.random() < 0.7:
        M = int(rng.integers(L + 1, 2 * L + 1))
        b = float(rng.uniform(0.0, 1.0))
        return FitnessParams(L, K, b=b, M=M, mu=mu if mu is not None else float(rng.uniform(0, 0.1)))
    half_b = rng.uniform(0.0, 1.0, size=2 * L)
    B = np.concatenate([half_b, [float(rng.uniform(0, 1))], half_b[::-1]])
    return FitnessParams(L, K, B=B, mu=mu if mu is not None else float(rng.uniform(0, 0.1)))


def random_interior_measure(rng, L):
    v = rng.dirichlet(np.ones(2 * L + 1) * rng.uniform(0.5, 4.0))
    v = np.maximum(v, 1e-9)
    return SimplexMeasure(v / v.sum())
