"""Win probabilities for majority and weighted-majority rules.

Simple majority over odd n uses the exact Poisson-binomial upper tail
P(sum X_i > n/2), X_i in {0,1}, computed by the O(n^2) convolution DP.
Weighted majority uses the signed formulation X_i in {-1,+1} and
P(sum w_i X_i > 0); ties (sum exactly 0) count as a loss, which makes
every reported value a lower bound on the rule's competence.  Exact
enumeration covers n <= 25; beyond that a seeded Monte Carlo with
per-replica substreams reports a normal-approximation 95% interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import streams
from .profile import Profile

__all__ = [
    "TallyEstimate",
    "majority_prob_exact",
    "anti_majority_prob_exact",
    "weighted_majority_prob",
    "proposition41_bound",
    "MAX_EXACT_N",
    "MAX_BRUTE_N",
]

MAX_EXACT_N = 200_001
MAX_BRUTE_N = 25
_REPLICA_TAG = 0x4D43
_BRUTE_CHUNK = 1 << 20
_MC_CHUNK_BUDGET = 1 << 22


@dataclass(frozen=True)
class TallyEstimate:
    value: float
    method: Literal["exact_dp", "brute_force", "monte_carlo"]
    half_width: float = 0.0
    n_replicas: int = 0
    tie_prob: float | None = None


def _checked_probs(profile: Profile) -> np.ndarray:
    n = profile.n
    if n % 2 == 0:
        raise ValueError(f"even voter count {n}: ties are out of scope, use odd n")
    if n > MAX_EXACT_N:
        raise ValueError(f"n={n} exceeds the exact-DP cap {MAX_EXACT_N}")
    return profile.competences


def poisson_binomial_pmf(ps: np.ndarray) -> np.ndarray:
    """PMF of sum of independent Bernoulli(p_i) by direct convolution."""
    n = len(ps)
    cur = np.zeros(n + 1)
    nxt = np.zeros(n + 1)
    tmp = np.zeros(n + 1)
    cur[0] = 1.0
    for k, p in enumerate(ps, start=1):
        np.multiply(cur[:k], p, out=tmp[:k])
        np.multiply(cur[:k], 1.0 - p, out=nxt[:k])
        nxt[k] = 0.0
        nxt[1 : k + 1] += tmp[:k]
        cur, nxt = nxt, cur
    return cur


def majority_prob_exact(profile: Profile) -> TallyEstimate:
    """Exact P(sum X_i > n/2) for independent X_i ~ Bernoulli(p_i)."""
    ps = _checked_probs(profile)
    pmf = poisson_binomial_pmf(ps)
    tail = pmf[(profile.n + 1) // 2 :]
    # smallest-first accumulation keeps the rounding error at O(n ulp)
    value = float(np.sum(np.sort(tail)))
    return TallyEstimate(value=min(max(value, 0.0), 1.0), method="exact_dp")


def anti_majority_prob_exact(profile: Profile) -> TallyEstimate:
    """Exact P(sum X_i < n/2): majority computed on the mirrored profile."""
    ps = _checked_probs(profile)
    flipped = Profile(1.0 - ps, profile.source, profile.seed)
    return majority_prob_exact(flipped)


def _brute_force_weighted(ps: np.ndarray, w: np.ndarray) -> TallyEstimate:
    n = len(ps)
    win = 0.0
    tie = 0.0
    for start in range(0, 1 << n, _BRUTE_CHUNK):
        idx = np.arange(start, min(start + _BRUTE_CHUNK, 1 << n), dtype=np.uint64)
        prob = np.ones(len(idx))
        score = np.zeros(len(idx))
        for i in range(n):
            bit = (idx >> np.uint64(i)) & np.uint64(1)
            correct = bit == 1
            prob *= np.where(correct, ps[i], 1.0 - ps[i])
            score += np.where(correct, w[i], -w[i])
        win += float(prob[score > 0.0].sum())
        tie += float(prob[score == 0.0].sum())
    return TallyEstimate(value=win, method="brute_force", tie_prob=tie)


def _monte_carlo_weighted(
    ps: np.ndarray, w: np.ndarray, replicas: int, seed: int
) -> TallyEstimate:
    n = len(ps)
    wins = 0
    w_sum = float(np.sum(w))
    chunk = max(1, _MC_CHUNK_BUDGET // n)
    for start in range(0, replicas, chunk):
        rows = np.arange(start, min(start + chunk, replicas))
        u = streams.uniforms_block(seed, (_REPLICA_TAG,), rows, n)
        correct = u < ps[None, :]
        score = 2.0 * (correct @ w) - w_sum
        wins += int(np.count_nonzero(score > 0.0))
    p_hat = wins / replicas
    half = 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / replicas)
    return TallyEstimate(
        value=p_hat, method="monte_carlo", half_width=half, n_replicas=replicas
    )


def weighted_majority_prob(
    profile: Profile,
    weights: np.ndarray | list[float],
    mode: Literal["auto", "brute", "mc"] = "auto",
    replicas: int = 10_000,
    seed: int = 0,
) -> TallyEstimate:
    """P(sum w_i X_i > 0) with X_i in {-1,+1} and P(X_i = +1) = p_i.

    Ties count as failure; brute force also reports the tie mass.
    Weights may be zero (expert rules silence voters) or negative
    (log-odds weights reverse a worse-than-chance vote); at least one
    must be nonzero.
    """
    ps = profile.competences
    w = np.asarray(weights, dtype=float)
    if w.shape != ps.shape:
        raise ValueError(f"{len(w)} weights for {len(ps)} voters")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if not np.any(w != 0.0):
        raise ValueError("at least one weight must be nonzero")
    if mode == "brute" and profile.n > MAX_BRUTE_N:
        raise ValueError(f"brute force capped at n={MAX_BRUTE_N}, got {profile.n}")
    if mode == "auto":
        mode = "brute" if profile.n <= MAX_BRUTE_N else "mc"
    if mode == "brute":
        return _brute_force_weighted(ps, w)
    if mode == "mc":
        if replicas < 100:
            raise ValueError("at least 100 replicas required")
        return _monte_carlo_weighted(ps, w, int(replicas), seed)
    raise ValueError(f"unknown mode {mode!r}")


def proposition41_bound(profile: Profile, weights: np.ndarray | list[float]) -> float:
    """Chebyshev bound 4*sum(w^2 p q) / (sum w (p - q))^2 on the loss
    probability of the weighted rule; requires positive drift."""
    ps = profile.competences
    w = np.asarray(weights, dtype=float)
    if w.shape != ps.shape:
        raise ValueError(f"{len(w)} weights for {len(ps)} voters")
    drift = float(np.sum(w * (2.0 * ps - 1.0)))
    if drift <= 0.0:
        raise ValueError("nonpositive drift: the bound is not applicable")
    var = float(np.sum(w * w * ps * (1.0 - ps)))
    return 4.0 * var / (drift * drift)
