"""Benchmark problem instances used by the experiment runner."""

from __future__ import annotations

import numpy as np

from .core import ProblemInstance

# Seed recorded so the randomized large-scale instance is reproducible.
EXAMPLE4_SEED = 727

# The 3-design instance behind the static-allocation study.
THREE_DESIGN_MEANS = (1.0, 2.0, 3.0)
THREE_DESIGN_VARIANCES = (36.0, 36.0, 36.0)


def three_design_instance() -> ProblemInstance:
    """Three designs N(i, 6^2): the small static-allocation benchmark."""
    return ProblemInstance(means=np.array(THREE_DESIGN_MEANS),
                           variances=np.array(THREE_DESIGN_VARIANCES))


def example1() -> ProblemInstance:
    """Ten designs N(i, 6^2), i = 1..10."""
    means = np.arange(1.0, 11.0)
    return ProblemInstance(means=means, variances=np.full(10, 36.0))


def example2() -> ProblemInstance:
    """Ten designs N(i, (11-i)^2): better designs have larger variances."""
    means = np.arange(1.0, 11.0)
    return ProblemInstance(means=means, variances=(11.0 - means) ** 2)


def example3() -> ProblemInstance:
    """Fifty designs N(i, 10^2)."""
    means = np.arange(1.0, 51.0)
    return ProblemInstance(means=means, variances=np.full(50, 100.0))


def example4(seed: int = EXAMPLE4_SEED) -> ProblemInstance:
    """Five hundred designs: best N(0, 6^2), the rest with means U(1, 16)
    and standard deviations U(3, 9)."""
    rng = np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(seed)))
    means = np.empty(500)
    sds = np.empty(500)
    means[0] = 0.0
    sds[0] = 6.0
    means[1:] = rng.uniform(1.0, 16.0, 499)
    sds[1:] = rng.uniform(3.0, 9.0, 499)
    return ProblemInstance(means=means, variances=sds**2)


EXAMPLES = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
    "three_design": three_design_instance,
}
