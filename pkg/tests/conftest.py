import numpy as np
import pytest

from rsalloc import ProblemInstance


def make_random_instance(rng, k_lo=3, k_hi=8, gap=0.3,
                         var_lo=0.5, var_hi=30.0) -> ProblemInstance:
    """Random instance with a unique best design at index 0."""
    k = int(rng.integers(k_lo, k_hi + 1))
    means = np.sort(rng.uniform(0.0, 8.0, k))
    means[1:] += gap
    variances = rng.uniform(var_lo, var_hi, k)
    return ProblemInstance(means=means, variances=variances)


@pytest.fixture
def rng():
    return np.random.default_rng(20250910)
