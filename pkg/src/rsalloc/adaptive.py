"""Budget-adaptive allocation: alpha factors, feasibility threshold, clamping.

The allocation scales each asymptotically optimal ratio by a budget-dependent
factor ``alpha_i(T)``; for budgets below the feasibility threshold the rule
falls back to the allocation at the threshold itself, which is always
feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AllocationVector
from .ocba import InformationRatios

# Detection width for the branch where the best design's asymptotic share is
# exactly one half; the quadratic's leading coefficient vanishes there.
HALF_SHARE_TOL = 1e-9

# Weights in [-NEGATIVE_CLIP, 0) arising from rounding at the feasibility
# boundary are clipped to zero and the vector renormalized.
NEGATIVE_CLIP = 1e-9


@dataclass(frozen=True)
class AdaptiveSolution:
    """Solution of the approximated optimality conditions at one budget.

    ``alphas`` follows the non-best designs in ascending index order.
    ``t0`` is the smallest budget at which the unclamped solution is
    guaranteed feasible; ``clamped`` is set when the requested budget fell
    below ``t0`` and the allocation at ``ceil(t0)`` was substituted.
    """

    lam: float
    alphas: np.ndarray
    weights: AllocationVector
    p: float
    q: float
    r: float
    t0: float
    t1: float
    t2: float
    clamped: bool


def _lambda_pieces(ratios: InformationRatios, variances, budget: float):
    """Quadratic coefficients and shared sums for the lambda formula."""
    var = np.asarray(variances, dtype=float)
    ivec, s_total, best = ratios.ivec, ratios.total, ratios.best
    nb = ratios.nonbest()
    i_nb = ivec[nb]
    log_i = np.log(i_nb)
    var_b = var[best]
    i_b = ivec[best]
    sum_ilog = float(np.sum(i_nb * log_i))
    sum_i2log = float(np.sum(i_nb**2 * log_i / var[nb]))
    sum_i2log2 = float(np.sum(i_nb**2 * log_i**2 / var[nb]))
    big = budget + s_total
    p = s_total * (2.0 * i_b - s_total)
    q = -4.0 * var_b * sum_i2log + 2.0 * (s_total - i_b) * (2.0 * sum_ilog + big)
    r = 4.0 * var_b * sum_i2log2 - (2.0 * sum_ilog + big) ** 2
    return p, q, r, sum_ilog, big, i_b, s_total


def _is_half_share(ratios: InformationRatios) -> bool:
    return abs(ratios.ivec[ratios.best] / ratios.total - 0.5) <= HALF_SHARE_TOL


def solve_lambda(ratios: InformationRatios, variances, best: int,
                 budget: float) -> float:
    """Solve for the multiplier lambda at the given budget.

    Uses the closed-form root of the quadratic ``p lam^2 + q lam + r = 0``
    (the ``(-q + sqrt(q^2-4pr)) / 2p`` root, evaluated in whichever of its
    two algebraically equivalent forms avoids cancellation), or the linear
    formula when the best design's asymptotic share is one half.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if best != ratios.best:
        raise ValueError("best index disagrees with the information ratios")
    p, q, r, sum_ilog, big, i_b, s_total = _lambda_pieces(ratios, variances, budget)
    if _is_half_share(ratios):
        return (4.0 * sum_ilog + big) / (2.0 * (s_total - i_b))
    disc = q * q - 4.0 * p * r
    if disc < 0.0:
        if disc < -1e-9 * q * q:
            raise ValueError(
                f"degenerate lambda quadratic: discriminant {disc!r} for q={q!r}")
        disc = 0.0
    root = math.sqrt(disc)
    if q <= 0.0:
        return (-q + root) / (2.0 * p)
    return 2.0 * r / (-q - root)


def alpha_factors(ratios: InformationRatios, lam: float,
                  budget: float) -> np.ndarray:
    """Budget-dependent multipliers ``(lam - 2 log I_i) / (1 + T/S)``.

    Entries follow the non-best designs in ascending index order.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    i_nb = ratios.ivec[ratios.nonbest()]
    return (lam - 2.0 * np.log(i_nb)) / (1.0 + budget / ratios.total)


def feasibility_threshold(ratios: InformationRatios, variances,
                          best: int) -> tuple[float, float, float]:
    """Budget threshold ``t0`` (with its two constituents ``t1``, ``t2``).

    The unclamped solution is feasible (all weights nonnegative) for every
    budget at or above ``t0``; the threshold can be negative, in which case
    every positive budget is feasible.
    """
    if best != ratios.best:
        raise ValueError("best index disagrees with the information ratios")
    var = np.asarray(variances, dtype=float)
    nb = ratios.nonbest()
    i_nb = ratios.ivec[nb]
    i_b = ratios.ivec[best]
    s_total = ratios.total
    var_b = var[best]
    log_ratio = np.log(i_nb.max() / i_nb)
    t1 = 2.0 * float(np.sum((var_b * i_nb**2 / (var[nb] * (s_total - i_b)) - i_nb)
                            * log_ratio)) - s_total
    t2 = (2.0 * float(np.sum(i_nb * log_ratio))
          + 2.0 * math.sqrt(var_b) * math.sqrt(float(np.sum(i_nb**2 / var[nb] * log_ratio**2)))
          - s_total)
    if _is_half_share(ratios):
        t0 = 4.0 * float(np.sum(i_nb * log_ratio)) - s_total
    else:
        t0 = max(t1, t2)
    return t0, t1, t2


def _solution_at(ratios: InformationRatios, variances, budget: float,
                 effective_budget: float, clamped: bool) -> AdaptiveSolution:
    var = np.asarray(variances, dtype=float)
    best = ratios.best
    nb = ratios.nonbest()
    lam = solve_lambda(ratios, var, best, effective_budget)
    alphas = alpha_factors(ratios, lam, effective_budget)
    p, q, r, *_ = _lambda_pieces(ratios, var, effective_budget)
    t0, t1, t2 = feasibility_threshold(ratios, var, best)

    w = np.empty(ratios.ivec.size)
    w[nb] = (ratios.ivec[nb] / ratios.total) * alphas
    if np.any(w[nb] < -NEGATIVE_CLIP):
        raise ValueError(
            f"infeasible allocation at budget {budget!r}: min weight {w[nb].min()!r}")
    w[nb] = np.maximum(w[nb], 0.0)
    w[best] = math.sqrt(var[best]) * math.sqrt(float(np.sum(w[nb] ** 2 / var[nb])))
    w /= w.sum()
    return AdaptiveSolution(lam=lam, alphas=alphas,
                            weights=AllocationVector(weights=w),
                            p=p, q=q, r=r, t0=t0, t1=t1, t2=t2, clamped=clamped)


def adaptive_ratios(ratios: InformationRatios, variances, best: int,
                    budget: float) -> AdaptiveSolution:
    """Unclamped budget-adaptive allocation ``W(T)``.

    The caller is responsible for ``budget >= t0``; below the threshold some
    weight turns negative and a ValueError is raised (tiny negatives within
    rounding of zero are clipped instead).
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if best != ratios.best:
        raise ValueError("best index disagrees with the information ratios")
    return _solution_at(ratios, variances, budget, budget, clamped=False)


def clamped_ratios(ratios: InformationRatios, variances, best: int,
                   budget: float) -> AdaptiveSolution:
    """Always-feasible allocation: ``W(T)``, or ``W(ceil(t0))`` when T < t0."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    if best != ratios.best:
        raise ValueError("best index disagrees with the information ratios")
    t0, _, _ = feasibility_threshold(ratios, variances, best)
    if t0 > 0 and budget < t0:
        return _solution_at(ratios, variances, budget, math.ceil(t0), clamped=True)
    return _solution_at(ratios, variances, budget, budget, clamped=False)


def small_budget_ratios(ratios: InformationRatios, variances,
                        best: int) -> AllocationVector:
    """Vanishing-budget limit allocation built from inverse ratios.

    Inverts the difficulty ordering: non-best designs that are hard to
    distinguish receive the least budget.  Exposed for study; no sequential
    policy uses it.
    """
    if best != ratios.best:
        raise ValueError("best index disagrees with the information ratios")
    var = np.asarray(variances, dtype=float)
    nb = ratios.nonbest()
    h = np.empty(ratios.ivec.size)
    h[nb] = 1.0 / ratios.ivec[nb]
    h[best] = math.sqrt(var[best]) * math.sqrt(float(np.sum(h[nb] ** 2 / var[nb])))
    w = h / h.sum()
    return AllocationVector(weights=w / w.sum())
