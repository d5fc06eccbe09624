"""Asymptotically optimal allocation ratios and balance-condition residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import VARIANCE_FLOOR, AllocationVector, ProblemInstance

# Smallest usable mean gap; sequential procedures hit near-ties and the
# information ratios must stay finite.
GAP_FLOOR = 1e-8


@dataclass(frozen=True)
class InformationRatios:
    """Information ratios I_i plus their total S.

    ``ivec[i] = var_i / gap_i**2`` for non-best designs measures how hard
    design i is to distinguish from the best; ``ivec[best]`` carries the
    best design's ratio ``sigma_b * sqrt(sum I_i^2 / var_i)``.
    """

    ivec: np.ndarray
    total: float
    best: int

    def __post_init__(self):
        ivec = np.asarray(self.ivec, dtype=float)
        if np.any(ivec <= 0):
            raise ValueError("information ratios must be strictly positive")
        if abs(self.total - ivec.sum()) > 1e-9 * max(1.0, abs(self.total)):
            raise ValueError("total must equal the sum of the ratios")
        object.__setattr__(self, "ivec", ivec)

    def nonbest(self) -> np.ndarray:
        return np.array([i for i in range(self.ivec.size) if i != self.best])


def information_ratios(means, variances, best: int) -> InformationRatios:
    """Compute the information ratios from (possibly plug-in) parameters.

    Variances are floored at ``VARIANCE_FLOOR`` and gaps at ``GAP_FLOOR`` so
    that degenerate sample estimates still produce finite ratios.
    """
    means = np.asarray(means, dtype=float)
    variances = np.maximum(np.asarray(variances, dtype=float), VARIANCE_FLOOR)
    k = means.size
    if k < 2:
        raise ValueError("need at least two designs")
    if not 0 <= best < k:
        raise ValueError("best index out of range")
    nb = np.array([i for i in range(k) if i != best])
    gaps = np.maximum(means[nb] - means[best], GAP_FLOOR)
    ivec = np.empty(k)
    ivec[nb] = variances[nb] / gaps**2
    ivec[best] = np.sqrt(variances[best]) * np.sqrt(np.sum(ivec[nb] ** 2 / variances[nb]))
    return InformationRatios(ivec=ivec, total=float(ivec.sum()), best=best)


def ocba_ratios(ratios: InformationRatios) -> AllocationVector:
    """Asymptotically optimal proportions ``w*_i = I_i / S``."""
    w = ratios.ivec / ratios.total
    return AllocationVector(weights=w / w.sum())


def ld_balance_residuals(instance: ProblemInstance,
                         alloc: AllocationVector) -> np.ndarray:
    """Residuals of the large-deviation balance conditions at ``alloc``.

    Returns k values: the k-1 per-design deviations of the rate
    ``delta_i^2 / (var_i/w_i + var_b/w_b)`` from the mean rate, followed by
    the residual of the best-design coupling
    ``w_b - sigma_b * sqrt(sum w_i^2 / var_i)``.  All entries vanish exactly
    when the allocation satisfies the balance conditions.
    """
    w = alloc.weights
    if np.any(w <= 0):
        raise ValueError("balance residuals require an interior allocation")
    nb = instance.nonbest()
    b = instance.best
    delta = instance.means[nb] - instance.means[b]
    rates = delta**2 / (instance.variances[nb] / w[nb] + instance.variances[b] / w[b])
    c1 = w[b] - np.sqrt(instance.variances[b]) * np.sqrt(np.sum(w[nb] ** 2 / instance.variances[nb]))
    return np.concatenate([rates - rates.mean(), [c1]])
