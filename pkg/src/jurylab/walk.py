"""Ballot-path combinatorics and random-walk experiments.

For the fair-coin measure (equal atoms at 0 and 1), the event that the
perfectly-informed count stays strictly ahead of k/2 at every odd
k <= 2m+1 has probability binom(2m+2, m+1) / 4^(m+1): a Catalan-path
count.  That value is computed exactly, checked against brute-force
enumeration for small m, and compared with its 1/sqrt(pi m) large-m
asymptote.  The module also estimates symmetric-walk first-passage
probabilities and the frequency with which an iid electorate contains
a given fraction of (almost) perfectly informed voters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import streams
from .measure import MeasureSpec, quantile
from .tally import TallyEstimate

__all__ = [
    "PathCount",
    "catalan",
    "border_measure",
    "border_measure_enumerated",
    "stirling_asymptote",
    "random_walk_return",
    "moa_fraction_experiment",
    "MAX_ENUM_M",
]

MAX_ENUM_M = 12
_WALK_TAG = 0x57A1
_MOA_TAG = 0x40A0
_STEP_BLOCK = 512  # keeps replica-by-step blocks around 40 MB at 1e4 replicas


@dataclass(frozen=True)
class PathCount:
    """Exact probability that the informed count leads through 2m+1 votes."""

    m: int
    numerator: int
    denominator: int
    closed_form: Fraction
    enumerated: Fraction | None = None

    @property
    def value(self) -> float:
        return self.numerator / self.denominator


def catalan(n: int) -> int:
    """n-th Catalan number binom(2n, n) / (n+1), exact."""
    if n < 0 or n > 100_000:
        raise ValueError("n must lie in [0, 1e5]")
    return math.comb(2 * n, n) // (n + 1)


def border_measure(m: int, enumerate_paths: bool = False) -> PathCount:
    """binom(2(m+1), m+1) / 2^(2(m+1)) with optional brute-force check.

    Enumeration walks all 2^(2m+1) zero/one sequences and counts those
    whose running ones-count exceeds k/2 at every odd k; it is capped at
    m <= 12 to stay around a second.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    num = math.comb(2 * (m + 1), m + 1)
    den = 4 ** (m + 1)
    enum = border_measure_enumerated(m) if enumerate_paths else None
    return PathCount(
        m=m, numerator=num, denominator=den, closed_form=Fraction(num, den), enumerated=enum
    )


def border_measure_enumerated(m: int) -> Fraction:
    """Exact leading-count probability by full sequence enumeration."""
    if not 1 <= m <= MAX_ENUM_M:
        raise ValueError(f"enumeration capped at m <= {MAX_ENUM_M}")
    n = 2 * m + 1
    total = 1 << n
    count = 0
    chunk = 1 << 20
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        ones = np.zeros(len(idx), dtype=np.int32)
        alive = np.ones(len(idx), dtype=bool)
        for k in range(1, n + 1):
            ones += ((idx >> np.uint64(k - 1)) & np.uint64(1)).astype(np.int32)
            if k % 2 == 1:
                alive &= 2 * ones > k
        count += int(np.count_nonzero(alive))
    return Fraction(count, total)


def stirling_asymptote(m: int) -> float:
    """Leading-order value 1/sqrt(pi m) of the border measure."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return 1.0 / math.sqrt(math.pi * m)


def random_walk_return(
    k: int, horizon: int, replicas: int, seed: int = 0
) -> TallyEstimate:
    """P(symmetric +-1 walk from 0 hits level k within `horizon` steps).

    Estimated by Monte Carlo with coupled step streams: for a fixed
    seed, a longer horizon replays the same steps and appends more, so
    estimates are nondecreasing in the horizon.  k = 0 is hit at the
    start, probability one.
    """
    if replicas < 100:
        raise ValueError("at least 100 replicas required")
    if horizon < abs(k):
        raise ValueError("horizon shorter than |k|: the level is unreachable")
    if k == 0:
        return TallyEstimate(1.0, "monte_carlo", 0.0, replicas)
    level = abs(k)  # symmetric walk: hitting +k and -k are equiprobable
    hits = np.zeros(replicas, dtype=bool)
    # replica streams are indexed by (replica, absolute step), so the
    # active set can be compacted without disturbing any draws
    active = np.arange(replicas)
    position = np.zeros(replicas, dtype=np.int32)
    done = 0
    while done < horizon and len(active):
        take = min(_STEP_BLOCK, horizon - done)
        u = streams.uniforms_block(seed, (_WALK_TAG,), active, take, col_start=done)
        steps = np.where(u < 0.5, -1, 1).astype(np.int32)
        partial = np.cumsum(steps, axis=1) + position[:, None]
        hit_now = partial.max(axis=1) >= level
        hits[active[hit_now]] = True
        active = active[~hit_now]
        position = partial[~hit_now, -1]
        done += take
    p_hat = float(np.count_nonzero(hits)) / replicas
    half = 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / replicas)
    return TallyEstimate(p_hat, "monte_carlo", half, replicas)


def moa_fraction_experiment(
    spec: MeasureSpec,
    eps0: float,
    eps: float,
    n: int,
    trials: int,
    seed: int = 0,
) -> TallyEstimate:
    """Frequency of iid profiles whose count of voters with
    p in [1-eps0, 1] exceeds eps * n."""
    if not 0.0 <= eps0 < 0.5:
        raise ValueError("eps0 must lie in [0, 1/2)")
    if trials < 100:
        raise ValueError("at least 100 trials required")
    if n < 1:
        raise ValueError("n must be positive")
    threshold = 1.0 - eps0
    successes = 0
    chunk = max(1, (1 << 22) // n)
    for start in range(0, trials, chunk):
        rows = np.arange(start, min(start + chunk, trials))
        u = streams.uniforms_block(seed, (_MOA_TAG,), rows, n)
        p = quantile(spec, u.ravel()).reshape(u.shape)
        counts = np.count_nonzero(p >= threshold, axis=1)
        successes += int(np.count_nonzero(counts > eps * n))
    p_hat = successes / trials
    half = 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)
    return TallyEstimate(p_hat, "monte_carlo", half, trials)
