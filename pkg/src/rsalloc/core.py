"""Shared domain types and incremental sample statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Floor applied to any sample variance used as a plug-in estimate; finite
# samples can collapse to zero spread even though true variances are positive.
VARIANCE_FLOOR = 1e-12

# Tolerance for the simplex normalization check on allocation vectors.
SIMPLEX_ATOL = 1e-9


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth for a ranking-and-selection problem.

    ``means[best]`` must be strictly smaller than every other mean (the best
    design is unique and "best" means smallest mean).
    """

    means: np.ndarray
    variances: np.ndarray
    best: int = field(init=False)

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        variances = np.asarray(self.variances, dtype=float)
        if means.ndim != 1 or variances.shape != means.shape:
            raise ValueError("means and variances must be 1-d arrays of equal length")
        if means.size < 2:
            raise ValueError("need at least two designs")
        if np.any(variances <= 0):
            raise ValueError("variances must be strictly positive")
        best = int(np.argmin(means))
        gaps = np.delete(means, best) - means[best]
        if np.any(gaps <= 0):
            raise ValueError("best design must be unique (strictly smallest mean)")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "best", best)

    @property
    def k(self) -> int:
        return self.means.size

    def nonbest(self) -> np.ndarray:
        """Indices of all designs except the best, in ascending order."""
        return np.array([i for i in range(self.k) if i != self.best])


@dataclass(frozen=True)
class SampleStats:
    """Running count, mean and sum of squared deviations for one design."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @property
    def variance(self) -> float:
        """Unbiased sample variance; defined only once count >= 2."""
        if self.count < 2:
            raise ValueError("sample variance requires at least two observations")
        return self.m2 / (self.count - 1)


def update_stats(stats: SampleStats, sample: float) -> SampleStats:
    """One-pass (Welford) update; returns a new SampleStats."""
    count = stats.count + 1
    delta = sample - stats.mean
    mean = stats.mean + delta / count
    m2 = stats.m2 + delta * (sample - mean)
    return SampleStats(count=count, mean=mean, m2=m2)


@dataclass(frozen=True)
class AllocationVector:
    """A point on the k-simplex: budget proportions per design."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("weights must be a 1-d vector of length >= 2")
        if np.any(w < 0):
            raise ValueError("allocation weights must be nonnegative")
        if abs(w.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"allocation weights must sum to 1 (got {w.sum()!r})")
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class GapStatistics:
    """Mean gaps and pooled deviations of non-best designs vs the best.

    Entries follow the non-best designs in ascending index order.
    """

    delta: np.ndarray
    sigmaib: np.ndarray


def gap_statistics(instance: ProblemInstance, alloc: AllocationVector,
                   budget: float) -> GapStatistics:
    """Gaps ``mu_i - mu_b`` and deviations ``sqrt(var_i/(w_i T) + var_b/(w_b T))``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = alloc.weights
    if np.any(w <= 0):
        raise ValueError("gap statistics require strictly positive weights")
    nb = instance.nonbest()
    b = instance.best
    delta = instance.means[nb] - instance.means[b]
    sigmaib = np.sqrt(instance.variances[nb] / (w[nb] * budget)
                      + instance.variances[b] / (w[b] * budget))
    return GapStatistics(delta=delta, sigmaib=sigmaib)


@dataclass(frozen=True)
class TrialTrace:
    """Step-by-step record of one sequential run.

    ``steps`` holds ``(t, allocated_design, estimated_best)`` tuples where
    ``t`` is the number of replications spent before the allocation, so the
    step indices run from ``n0 * k`` up to ``T - 1``.  ``selection`` is the
    design with the smallest sample mean after the budget is exhausted.
    """

    steps: list
    selection: int
