"""Compiled trial loop for Gaussian benchmark runs.

Mirrors the arithmetic of :mod:`rsalloc.policies` / :mod:`rsalloc.adaptive`
step for step so that traces agree with the generic engine path; the generic
path stays the reference implementation.  Samples are consumed from
pre-drawn per-design buffers so the kernel itself never touches an RNG.
Numeric edge cases that the reference path reports as errors (a materially
negative lambda discriminant) are clamped here instead; they cannot occur
through the clamped allocation rule.
"""

from __future__ import annotations

import numpy as np
from numba import njit

POLICY_EA = 0
POLICY_OCBA = 1
POLICY_FAA = 2
POLICY_DAA = 3

POLICY_IDS = {"ea": POLICY_EA, "ocba": POLICY_OCBA,
              "faa": POLICY_FAA, "daa": POLICY_DAA}

VARIANCE_FLOOR = 1e-12
GAP_FLOOR = 1e-8
HALF_SHARE_TOL = 1e-9


@njit(cache=True)
def _trial_kernel(buf, starts, caps, k, n0, total_budget, policy,
                  counts, means, m2, used, t_box, choices, bhats):
    """Advance one trial until the budget or a sample buffer is exhausted.

    Returns the selected design (>= 0) when the budget is spent, or
    ``-1 - design`` when ``design`` ran out of pre-drawn samples; the caller
    refills that buffer and re-enters with the same state arrays.
    """
    t = t_box[0]
    if t == 0:
        for i in range(k):
            for _ in range(n0):
                x = buf[starts[i] + used[i]]
                used[i] += 1
                counts[i] += 1
                d = x - means[i]
                means[i] += d / counts[i]
                m2[i] += d * (x - means[i])
        t = n0 * k

    w = np.empty(k)
    ivec = np.empty(k)
    variances = np.empty(k)

    while t < total_budget:
        bhat = 0
        for i in range(1, k):
            if means[i] < means[bhat]:
                bhat = i

        if policy == POLICY_EA:
            for i in range(k):
                w[i] = 1.0 / k
        else:
            for i in range(k):
                v = m2[i] / (counts[i] - 1)
                if v < VARIANCE_FLOOR:
                    v = VARIANCE_FLOOR
                variances[i] = v
            acc = 0.0
            for i in range(k):
                if i != bhat:
                    gap = means[i] - means[bhat]
                    if gap < GAP_FLOOR:
                        gap = GAP_FLOOR
                    ivec[i] = variances[i] / (gap * gap)
                    acc += ivec[i] * ivec[i] / variances[i]
            ivec[bhat] = np.sqrt(variances[bhat]) * np.sqrt(acc)
            s_total = 0.0
            for i in range(k):
                s_total += ivec[i]

            if policy == POLICY_OCBA:
                wsum = 0.0
                for i in range(k):
                    w[i] = ivec[i] / s_total
                    wsum += w[i]
                for i in range(k):
                    w[i] /= wsum
            else:
                anchor = float(total_budget) if policy == POLICY_FAA else float(t + 1)
                i_b = ivec[bhat]
                var_b = variances[bhat]
                i_max = 0.0
                for i in range(k):
                    if i != bhat and ivec[i] > i_max:
                        i_max = ivec[i]
                sum_ilogr = 0.0
                sum_t1 = 0.0
                sum_i2logr2 = 0.0
                sum_ilog = 0.0
                sum_i2log = 0.0
                sum_i2log2 = 0.0
                for i in range(k):
                    if i != bhat:
                        log_ratio = np.log(i_max / ivec[i])
                        log_i = np.log(ivec[i])
                        sum_ilogr += ivec[i] * log_ratio
                        sum_t1 += (var_b * ivec[i] * ivec[i]
                                   / (variances[i] * (s_total - i_b))
                                   - ivec[i]) * log_ratio
                        sum_i2logr2 += (ivec[i] * ivec[i] / variances[i]
                                        * log_ratio * log_ratio)
                        sum_ilog += ivec[i] * log_i
                        sum_i2log += ivec[i] * ivec[i] * log_i / variances[i]
                        sum_i2log2 += (ivec[i] * ivec[i] * log_i * log_i
                                       / variances[i])
                half = abs(i_b / s_total - 0.5) <= HALF_SHARE_TOL
                if half:
                    t0 = 4.0 * sum_ilogr - s_total
                else:
                    t1 = 2.0 * sum_t1 - s_total
                    t2 = (2.0 * sum_ilogr
                          + 2.0 * np.sqrt(var_b) * np.sqrt(sum_i2logr2)
                          - s_total)
                    t0 = t1 if t1 > t2 else t2
                teff = anchor
                if t0 > 0.0 and anchor < t0:
                    teff = np.ceil(t0)
                big = teff + s_total
                if half:
                    lam = (4.0 * sum_ilog + big) / (2.0 * (s_total - i_b))
                else:
                    p = s_total * (2.0 * i_b - s_total)
                    q = (-4.0 * var_b * sum_i2log
                         + 2.0 * (s_total - i_b) * (2.0 * sum_ilog + big))
                    r = (4.0 * var_b * sum_i2log2
                         - (2.0 * sum_ilog + big) ** 2)
                    disc = q * q - 4.0 * p * r
                    if disc < 0.0:
                        disc = 0.0
                    root = np.sqrt(disc)
                    if q <= 0.0:
                        lam = (-q + root) / (2.0 * p)
                    else:
                        lam = 2.0 * r / (-q - root)
                acc2 = 0.0
                for i in range(k):
                    if i != bhat:
                        alpha = (lam - 2.0 * np.log(ivec[i])) / (1.0 + teff / s_total)
                        wi = (ivec[i] / s_total) * alpha
                        if wi < 0.0:
                            wi = 0.0
                        w[i] = wi
                        acc2 += wi * wi / variances[i]
                w[bhat] = np.sqrt(var_b) * np.sqrt(acc2)
                wsum = 0.0
                for i in range(k):
                    wsum += w[i]
                for i in range(k):
                    w[i] /= wsum

        chosen = 0
        best_score = (t + 1) * w[0] - counts[0]
        for i in range(1, k):
            score = (t + 1) * w[i] - counts[i]
            if score > best_score:
                best_score = score
                chosen = i

        if used[chosen] >= caps[chosen]:
            t_box[0] = t
            return -1 - chosen

        choices[t - n0 * k] = chosen
        bhats[t - n0 * k] = bhat
        x = buf[starts[chosen] + used[chosen]]
        used[chosen] += 1
        counts[chosen] += 1
        d = x - means[chosen]
        means[chosen] += d / counts[chosen]
        m2[chosen] += d * (x - means[chosen])
        t += 1

    t_box[0] = t
    selection = 0
    for i in range(1, k):
        if means[i] < means[selection]:
            selection = i
    return selection
