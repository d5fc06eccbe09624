"""Bonferroni lower bound on the probability of correct selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .core import AllocationVector, ProblemInstance, gap_statistics


@dataclass(frozen=True)
class ApcsValue:
    """Value of the Bonferroni PCS bound; never exceeds 1."""

    value: float


def apcs(instance: ProblemInstance, alloc: AllocationVector,
         budget: float) -> ApcsValue:
    """Evaluate ``1 - sum_i Phi(-delta_i / sigma_ib)`` over non-best designs.

    Requires strictly positive weights on every design (otherwise the pooled
    deviation of some pair is infinite) and a positive budget.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if np.any(alloc.weights <= 0):
        raise ValueError("APCS requires a strictly positive weight on every design")
    gaps = gap_statistics(instance, alloc, budget)
    return ApcsValue(value=float(1.0 - np.sum(ndtr(-gaps.delta / gaps.sigmaib))))


def selection_risk(means, variances, best, weights, budget) -> float:
    """Complement of the APCS bound: ``sum_i Phi(-delta_i/sigma_ib)``.

    Unlike :func:`apcs` this accepts any strictly positive weight vector, not
    just points on the simplex, so finite-difference probes stay well defined.
    """
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    nb = np.array([i for i in range(means.size) if i != best])
    delta = means[nb] - means[best]
    sigmaib = np.sqrt(variances[nb] / (w[nb] * budget)
                      + variances[best] / (w[best] * budget))
    return float(np.sum(ndtr(-delta / sigmaib)))


def numerical_hessian(instance: ProblemInstance, alloc: AllocationVector,
                      budget: float, step: float = 1e-5) -> np.ndarray:
    """Central-difference Hessian of the APCS complement at ``alloc``.

    The derivatives are taken coordinate-wise in unconstrained weight space
    (each weight perturbed independently, no renormalization); the complement
    is well defined at any strictly positive weight vector, and this is the
    sense in which its Hessian is positive semi-definite.
    """
    if not 0 < step <= 1e-3:
        raise ValueError("step must lie in (0, 1e-3]")
    w = alloc.weights
    if np.any(w < step):
        raise ValueError("allocation must be interior: every weight >= step")
    k = w.size
    m, v, b = instance.means, instance.variances, instance.best

    def g(x):
        return selection_risk(m, v, b, x, budget)

    hess = np.empty((k, k))
    g0 = g(w)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = step
        hess[i, i] = (g(w + ei) - 2.0 * g0 + g(w - ei)) / step**2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = step
            hess[i, j] = (g(w + ei + ej) - g(w + ei - ej)
                          - g(w - ei + ej) + g(w - ei - ej)) / (4.0 * step**2)
            hess[j, i] = hess[i, j]
    return hess
