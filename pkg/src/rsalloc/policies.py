"""Sequential allocation policies: EA, sequential OCBA, FAA and DAA."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adaptive import clamped_ratios
from .core import VARIANCE_FLOOR, AllocationVector, SampleStats
from .ocba import information_ratios, ocba_ratios


@dataclass
class PolicyState:
    """Mutable state of one sequential trial.

    ``t`` is the total number of replications spent so far and must equal the
    sum of the per-design counts.  ``budget`` is the final budget anchored by
    the final-budget policy; the others ignore it.
    """

    stats: list[SampleStats]
    t: int
    n0: int
    budget: int

    @property
    def k(self) -> int:
        return len(self.stats)

    def counts(self) -> np.ndarray:
        return np.array([s.count for s in self.stats])


def initial_state(k: int, n0: int, budget: int) -> PolicyState:
    """Empty state prior to the initialization samples."""
    if n0 < 2:
        raise ValueError("need n0 >= 2 so sample variances are defined")
    if budget <= n0 * k:
        raise ValueError("budget must exceed n0 * k")
    return PolicyState(stats=[SampleStats() for _ in range(k)], t=0,
                       n0=n0, budget=budget)


def most_starving(ratios: AllocationVector, counts, t: int) -> int:
    """Design maximizing ``(t+1) * w_i - N_i``; ties go to the lowest index."""
    scores = (t + 1) * ratios.weights - np.asarray(counts)
    return int(np.argmax(scores))


def _plugin_estimates(state: PolicyState):
    """Counts, sample means and floored sample variances as plug-in values."""
    counts = np.empty(state.k, dtype=np.int64)
    means = np.empty(state.k)
    variances = np.empty(state.k)
    for i, s in enumerate(state.stats):
        counts[i] = s.count
        means[i] = s.mean
        variances[i] = max(s.m2 / (s.count - 1), VARIANCE_FLOOR)
    return counts, means, variances


def _check_budget(state: PolicyState):
    if state.t >= state.budget:
        raise RuntimeError(f"budget exhausted: t={state.t} >= T={state.budget}")


def ea_next(state: PolicyState) -> int:
    """Equal allocation: most-starving under uniform ratios (round robin)."""
    k = state.k
    uniform = AllocationVector(weights=np.full(k, 1.0 / k))
    return most_starving(uniform, state.counts(), state.t)


def ocba_seq_next(state: PolicyState) -> int:
    """Sequential OCBA: most-starving under plug-in asymptotic ratios."""
    counts, means, variances = _plugin_estimates(state)
    bhat = int(np.argmin(means))
    ratios = information_ratios(means, variances, bhat)
    return most_starving(ocba_ratios(ratios), counts, state.t)


def _adaptive_next(state: PolicyState, anchor: int) -> int:
    counts, means, variances = _plugin_estimates(state)
    bhat = int(np.argmin(means))
    ratios = information_ratios(means, variances, bhat)
    solution = clamped_ratios(ratios, variances, bhat, anchor)
    return most_starving(solution.weights, counts, state.t)


def faa_next(state: PolicyState) -> int:
    """Final-budget anchorage: adaptive ratios anchored at the final budget."""
    _check_budget(state)
    return _adaptive_next(state, state.budget)


def daa_next(state: PolicyState) -> int:
    """Dynamic anchorage: adaptive ratios anchored at the next step ``t+1``."""
    _check_budget(state)
    return _adaptive_next(state, state.t + 1)


POLICIES = {
    "ea": ea_next,
    "ocba": ocba_seq_next,
    "faa": faa_next,
    "daa": daa_next,
}
