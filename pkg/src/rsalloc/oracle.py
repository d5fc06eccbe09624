"""Brute-force ground truth: grid search over static allocations and a
numeric maximizer of the selection-probability bound."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtri

from .apcs import apcs
from .core import AllocationVector, ProblemInstance
from .engine import PcsEstimate, _U_FLOOR

_SAMPLE_CHUNK = 200_000


def simplex_grid(k: int, step: float) -> list[AllocationVector]:
    """All k-vectors of nonnegative multiples of ``step`` summing to one.

    Points are generated in lexicographic order of their coordinates.
    """
    if k < 2:
        raise ValueError("need at least two designs")
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-12:
        raise ValueError("step must divide 1")
    points = []

    def extend(prefix, remaining):
        if len(prefix) == k - 1:
            points.append(prefix + [remaining])
            return
        for units in range(remaining + 1):
            extend(prefix + [units], remaining - units)

    extend([], n)
    return [AllocationVector(weights=np.array(p, dtype=float) / n) for p in points]


def integerize_counts(alloc: AllocationVector, budget: int) -> np.ndarray:
    """Whole replication counts: floor each share, then hand the remaining
    replications to the largest fractional parts (lowest index on ties)."""
    raw = alloc.weights * budget
    counts = np.floor(raw).astype(np.int64)
    remainder = int(round(budget - counts.sum()))
    frac = raw - np.floor(raw)
    order = np.argsort(-frac, kind="stable")
    for j in range(remainder):
        counts[order[j]] += 1
    return counts


def static_pcs(instance: ProblemInstance, alloc: AllocationVector, budget: int,
               reps: int, seed) -> PcsEstimate:
    """Monte Carlo PCS of a fixed allocation.

    Each design receives its integerized replication count and the design
    with the smallest sample mean is selected.  Sample means are drawn from
    their exact sampling distribution ``N(mu_i, var_i / N_i)`` (the sample
    mean is a sufficient statistic of a fixed Gaussian allocation), one
    inverse-CDF normal per design per macro replication.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    if np.any(alloc.weights <= 0):
        raise ValueError("every design needs positive weight (PCS undefined "
                         "for a design with no samples)")
    if np.any(np.floor(alloc.weights * budget) < 1):
        raise ValueError("every design must receive at least one replication")
    counts = integerize_counts(alloc, budget)
    sd = np.sqrt(instance.variances / counts)
    rng = np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(seed)))
    k = instance.k
    correct = 0
    done = 0
    while done < reps:
        m = min(_SAMPLE_CHUNK, reps - done)
        u = np.maximum(rng.random((m, k)), _U_FLOOR)
        xbar = instance.means + ndtri(u) * sd
        correct += int(np.sum(np.argmin(xbar, axis=1) == instance.best))
        done += m
    pcs = correct / reps
    return PcsEstimate(pcs=pcs, stderr=math.sqrt(pcs * (1 - pcs) / reps),
                       replications=reps)


def optimal_static_allocation(instance: ProblemInstance, budget: int,
                              step: float, reps: int, seed) -> AllocationVector:
    """Grid point maximizing the Monte Carlo PCS.

    Grid points that would leave some design without a replication are not
    valid static allocations and are skipped.  Ties keep the first point in
    lexicographic grid order; every point gets its own derived stream.
    """
    best_alloc = None
    best_pcs = -1.0
    for idx, alloc in enumerate(simplex_grid(instance.k, step)):
        if np.any(alloc.weights <= 0):
            continue
        if np.any(np.floor(alloc.weights * budget) < 1):
            continue
        est = static_pcs(instance, alloc, budget, reps, seed=(seed, idx))
        if est.pcs > best_pcs:
            best_pcs = est.pcs
            best_alloc = alloc
    if best_alloc is None:
        raise ValueError("no grid point gives every design a replication at "
                         f"budget {budget}")
    return best_alloc


def _log_risk_and_grad(instance: ProblemInstance, w: np.ndarray, budget: float):
    """Log of the selection-risk bound (APCS complement) and its gradient.

    Working on the log keeps the objective meaningful at budgets where the
    individual tail probabilities underflow.
    """
    nb = instance.nonbest()
    b = instance.best
    var = instance.variances
    delta = instance.means[nb] - instance.means[b]
    s = np.sqrt((var[nb] / w[nb] + var[b] / w[b]) / budget)
    x = delta / s
    log_terms = log_ndtr(-x)
    total = logsumexp(log_terms)
    hazard = np.exp(-0.5 * x * x - 0.5 * math.log(2 * math.pi) - log_terms)
    soft = np.exp(log_terms - total)
    grad = np.zeros(instance.k)
    grad[nb] = -soft * hazard * delta * var[nb] / (2.0 * w[nb] ** 2 * budget * s**3)
    grad[b] = -np.sum(soft * hazard * delta * var[b] / (2.0 * w[b] ** 2 * budget * s**3))
    return total, grad


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    cum = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - cum) / np.arange(1, v.size + 1) > 0)[0][-1]
    theta = (1.0 - cum[rho]) / (rho + 1.0)
    return np.maximum(v + theta, 0.0)


def numeric_apcs_maximizer(instance: ProblemInstance, budget: float,
                           tolerance: float = 1e-7,
                           max_iter: int = 100_000) -> AllocationVector:
    """Allocation maximizing the Bonferroni bound, by projected gradient.

    Accelerated projected descent on the log selection risk starting from
    equal allocation, step sizes by backtracking halving.  The bound is
    concave so the stationary point is the global maximizer; convergence is
    declared when an accepted iterate moves by at most ``tolerance`` in any
    coordinate (the step-normalized gradient-mapping criterion).  Raises if
    the iteration cap is hit first.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    k = instance.k
    floor = 1e-12
    w = np.full(k, 1.0 / k)
    value, grad = _log_risk_and_grad(instance, w, budget)
    step = 1.0 / (1.0 + np.abs(grad).max())
    accel = w.copy()
    momentum = 1.0
    for _ in range(max_iter):
        value_a, grad_a = _log_risk_and_grad(instance, accel, budget)
        step = min(step * 2.0, 1e12)
        while True:
            proposal = project_to_simplex(accel - step * grad_a)
            proposal = np.maximum(proposal, floor)
            proposal /= proposal.sum()
            value_p, _ = _log_risk_and_grad(instance, proposal, budget)
            if value_p <= value_a or step < 1e-18:
                break
            step *= 0.5
        if value_p > value:
            # momentum overshoot: restart from the best iterate
            accel = w.copy()
            momentum = 1.0
            continue
        moved = np.abs(proposal - w).max()
        momentum_next = (1.0 + math.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
        accel = project_to_simplex(proposal + ((momentum - 1.0) / momentum_next)
                                   * (proposal - w))
        accel = np.maximum(accel, floor)
        accel /= accel.sum()
        w, value = proposal, value_p
        momentum = momentum_next
        if moved <= tolerance:
            return AllocationVector(weights=w)
    raise RuntimeError(f"no convergence within {max_iter} iterations "
                       f"(tolerance {tolerance})")


def apcs_of(instance: ProblemInstance, weights: np.ndarray, budget: float) -> float:
    """Convenience: the bound's value at a raw weight vector."""
    return apcs(instance, AllocationVector(weights=weights), budget).value
