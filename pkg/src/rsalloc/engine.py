"""Trial runner and Monte Carlo PCS estimation over macro replications."""

from __future__ import annotations

import abc
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import _kernel
from .core import ProblemInstance, SampleStats, TrialTrace, update_stats
from .policies import POLICIES, PolicyState

# Counter offset separating per-design substreams inside one replication's
# Philox stream; no trial consumes anywhere near 2**40 draws per design.
DESIGN_STREAM_STRIDE = 1 << 40

# Uniform draws are clamped away from 0 before the inverse CDF so a
# once-in-2**53 draw cannot produce an infinite normal variate.
_U_FLOOR = 2.0 ** -53


def design_stream(seed: int, rep: int, design: int) -> np.random.Generator:
    """Counter-based stream for (seed, replication, design).

    Macro replication streams are keyed by (seed, rep); designs occupy
    disjoint counter blocks of the same stream, so parallel and serial runs
    consume identical numbers regardless of allocation order.
    """
    key = np.array([np.uint64(seed & (2**64 - 1)), np.uint64(rep)], dtype=np.uint64)
    bitgen = np.random.Philox(key=key)
    bitgen.advance(design * DESIGN_STREAM_STRIDE)
    return np.random.Generator(bitgen)


def normal_from_stream(rng: np.random.Generator, mean: float, sd: float) -> float:
    """One normal variate by inverse CDF (one uniform consumed per draw)."""
    u = max(rng.random(), _U_FLOOR)
    return mean + sd * float(ndtri(u))


class SamplingSource(abc.ABC):
    """Per-design sampler: one real-valued output given a design and a stream."""

    @property
    @abc.abstractmethod
    def k(self) -> int:
        """Number of designs."""

    @abc.abstractmethod
    def sample(self, design: int, rng: np.random.Generator) -> float:
        """Draw one output sample for ``design`` from ``rng``."""


class GaussianSource(SamplingSource):
    """Normal outputs with the means and variances of a problem instance."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self._sd = np.sqrt(instance.variances)

    @property
    def k(self) -> int:
        return self.instance.k

    def sample(self, design: int, rng: np.random.Generator) -> float:
        return normal_from_stream(rng, self.instance.means[design], self._sd[design])


@dataclass(frozen=True)
class PcsEstimate:
    """Empirical probability of correct selection with its binomial stderr."""

    pcs: float
    stderr: float
    replications: int


def _resolve_policy(policy):
    """Accept a policy name or one of the canonical policy callables."""
    if isinstance(policy, str):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}; choose from {sorted(POLICIES)}")
        return policy, POLICIES[policy]
    for name, fn in POLICIES.items():
        if policy is fn:
            return name, fn
    return None, policy


def run_trial(source: SamplingSource, policy, k: int, n0: int, budget: int,
              seed: int, rep: int = 0) -> TrialTrace:
    """Run one sequential trial and record its trace.

    Initializes ``n0`` samples per design (design order), then asks the
    policy for one design per step until ``budget`` replications are spent.
    This is the generic reference path; it works with any sampling source
    and any policy callable.
    """
    if n0 < 2:
        raise ValueError("need n0 >= 2 so sample variances are defined")
    if budget <= n0 * k:
        raise ValueError(f"budget {budget} must exceed n0 * k = {n0 * k}")
    _, policy_fn = _resolve_policy(policy)
    streams = [design_stream(seed, rep, i) for i in range(k)]
    state = PolicyState(stats=[SampleStats() for _ in range(k)], t=0,
                        n0=n0, budget=budget)
    for i in range(k):
        for _ in range(n0):
            state.stats[i] = update_stats(state.stats[i], source.sample(i, streams[i]))
    state.t = n0 * k
    steps = []
    while state.t < budget:
        means = [s.mean for s in state.stats]
        bhat = int(np.argmin(means))
        chosen = policy_fn(state)
        steps.append((state.t, chosen, bhat))
        state.stats[chosen] = update_stats(
            state.stats[chosen], source.sample(chosen, streams[chosen]))
        state.t += 1
    selection = int(np.argmin([s.mean for s in state.stats]))
    return TrialTrace(steps=steps, selection=selection)


def _kernel_trial(instance: ProblemInstance, policy_id: int, n0: int,
                  budget: int, seed: int, rep: int, record: bool = False):
    """Run one Gaussian trial through the compiled kernel.

    Per-design sample buffers are pre-drawn by inverse CDF from the same
    streams the generic path uses, growing on demand so heavily sampled
    designs never run dry.
    """
    k = instance.k
    mu = instance.means
    sd = np.sqrt(instance.variances)
    cap0 = max(64, n0 + math.ceil(2.2 * (budget - n0 * k) / k))
    caps = np.full(k, cap0, dtype=np.int64)
    gens = [design_stream(seed, rep, i) for i in range(k)]
    bufs = []
    for i in range(k):
        u = np.maximum(gens[i].random(cap0), _U_FLOOR)
        bufs.append(mu[i] + sd[i] * ndtri(u))

    counts = np.zeros(k, dtype=np.int64)
    means = np.zeros(k)
    m2 = np.zeros(k)
    used = np.zeros(k, dtype=np.int64)
    t_box = np.zeros(1, dtype=np.int64)
    n_steps = budget - n0 * k
    choices = np.empty(n_steps, dtype=np.int64)
    bhats = np.empty(n_steps, dtype=np.int64)
    while True:
        starts = np.zeros(k, dtype=np.int64)
        np.cumsum(caps[:-1], out=starts[1:])
        flat = np.concatenate(bufs)
        res = _kernel._trial_kernel(flat, starts, caps, k, n0, budget,
                                    policy_id, counts, means, m2, used,
                                    t_box, choices, bhats)
        if res >= 0:
            break
        i = -1 - res
        extra = int(caps[i])
        u = np.maximum(gens[i].random(extra), _U_FLOOR)
        bufs[i] = np.concatenate([bufs[i], mu[i] + sd[i] * ndtri(u)])
        caps[i] += extra
    if record:
        return int(res), choices, bhats
    return int(res)


def _count_correct_kernel(instance, policy_id, n0, budget, seed, rep_range):
    correct = 0
    for rep in rep_range:
        if _kernel_trial(instance, policy_id, n0, budget, seed, rep) == instance.best:
            correct += 1
    return correct


def _count_correct_generic(source, best, policy_name, n0, budget, seed, rep_range):
    k = source.k
    _, policy_fn = _resolve_policy(policy_name)
    correct = 0
    for rep in rep_range:
        streams = [design_stream(seed, rep, i) for i in range(k)]
        state = PolicyState(stats=[SampleStats() for _ in range(k)], t=0,
                            n0=n0, budget=budget)
        for i in range(k):
            for _ in range(n0):
                state.stats[i] = update_stats(state.stats[i],
                                              source.sample(i, streams[i]))
        state.t = n0 * k
        while state.t < budget:
            chosen = policy_fn(state)
            state.stats[chosen] = update_stats(
                state.stats[chosen], source.sample(chosen, streams[chosen]))
            state.t += 1
        if int(np.argmin([s.mean for s in state.stats])) == best:
            correct += 1
    return correct


def _split_ranges(reps: int, workers: int):
    chunk = math.ceil(reps / workers)
    return [range(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]


def _kernel_worker(args):
    means, variances, policy_id, n0, budget, seed, lo, hi = args
    instance = ProblemInstance(means=means, variances=variances)
    return _count_correct_kernel(instance, policy_id, n0, budget, seed, range(lo, hi))


def _generic_worker(args):
    source, best, policy_name, n0, budget, seed, lo, hi = args
    return _count_correct_generic(source, best, policy_name, n0, budget, seed,
                                  range(lo, hi))


def _binomial_estimate(correct: int, reps: int) -> PcsEstimate:
    pcs = correct / reps
    return PcsEstimate(pcs=pcs, stderr=math.sqrt(pcs * (1.0 - pcs) / reps),
                       replications=reps)


def estimate_pcs(instance: ProblemInstance, policy, n0: int, budget: int,
                 reps: int, seed: int, workers: int = 1) -> PcsEstimate:
    """Empirical PCS of a policy over independent macro replications.

    Replication ``r`` draws from streams keyed by ``(seed, r)``, so the
    result is bit-identical no matter how the replications are split across
    worker processes.  The four canonical policies run through the compiled
    kernel; any other callable falls back to the generic path.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    name, _ = _resolve_policy(policy)
    if name is not None:
        policy_id = _kernel.POLICY_IDS[name]
        if workers <= 1:
            correct = _count_correct_kernel(instance, policy_id, n0, budget,
                                            seed, range(reps))
        else:
            jobs = [(instance.means, instance.variances, policy_id, n0, budget,
                     seed, r.start, r.stop) for r in _split_ranges(reps, workers)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                correct = sum(pool.map(_kernel_worker, jobs))
        return _binomial_estimate(correct, reps)
    source = GaussianSource(instance)
    return estimate_pcs_from_source(source, instance.best, policy, n0, budget,
                                    reps, seed, workers=workers)


def estimate_pcs_from_source(source: SamplingSource, best: int, policy,
                             n0: int, budget: int, reps: int, seed: int,
                             workers: int = 1) -> PcsEstimate:
    """Empirical PCS against an arbitrary sampling source.

    ``best`` names the design whose selection counts as correct (for sources
    without known means, the ground truth established separately).
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    name, policy_fn = _resolve_policy(policy)
    policy_arg = name if name is not None else policy_fn
    if workers <= 1:
        correct = _count_correct_generic(source, best, policy_arg, n0, budget,
                                         seed, range(reps))
    else:
        jobs = [(source, best, policy_arg, n0, budget, seed, r.start, r.stop)
                for r in _split_ranges(reps, workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            correct = sum(pool.map(_generic_worker, jobs))
    return _binomial_estimate(correct, reps)
