"""Competence profiles (p_1, ..., p_n) and finite-n condition diagnostics.

Profiles come either from iid draws of a measure on [0,1] or from the
analytic families used throughout the package: constant-edge voters,
a mostly-uninformed electorate with a perfectly informed slice, slowly
decaying boosts with average competence one half, and deterministic
0/1 sequences.  The diagnostics trace the two quantities that decide
whether majority voting becomes reliable along a sequence: the drift
statistic Q_k and the count of perfectly informed voters, plus their
generalized per-index-mean versions and Chebyshev bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import streams
from .measure import MeasureSpec, atom_mass, moment, quantile

__all__ = [
    "IidSource",
    "ExplicitSource",
    "CondorcetSource",
    "MoaSource",
    "C1Source",
    "C2Source",
    "ProfileSource",
    "Profile",
    "ConditionReport",
    "DegenerateProfileError",
    "generate",
    "q_statistic",
    "condition_two_holds",
    "condition_report",
    "geometric_checkpoints",
]

_IID_TAG = 0x1D1D


@dataclass(frozen=True)
class IidSource:
    """Independent draws from one measure on [0,1]."""

    measure: MeasureSpec


@dataclass(frozen=True)
class ExplicitSource:
    """A literal competence sequence; generation takes its prefix."""

    competences: tuple[float, ...]

    def __post_init__(self) -> None:
        comp = tuple(float(p) for p in self.competences)
        object.__setattr__(self, "competences", comp)
        if any(not 0.0 <= p <= 1.0 for p in comp):
            raise ValueError("competences must lie in [0,1]")


@dataclass(frozen=True)
class CondorcetSource:
    """Every voter at 1/2 + eps, eps in (0, 1/2]."""

    eps: float

    def __post_init__(self) -> None:
        if not 0.0 < self.eps <= 0.5:
            raise ValueError("eps must lie in (0, 1/2]")


@dataclass(frozen=True)
class MoaSource:
    """floor(eps*n) perfectly informed voters, the rest at 1/2."""

    informed_fraction: float

    def __post_init__(self) -> None:
        if not 0.0 < self.informed_fraction <= 1.0:
            raise ValueError("informed_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class C1Source:
    """p_i = 1/2 + min(i^alpha, 1/2) with alpha in (-1/2, 0).

    The boosts average out to zero (mean competence tends to 1/2) while
    their sqrt(k)-normalized sum still diverges, so majority voting
    becomes reliable anyway.
    """

    alpha: float

    def __post_init__(self) -> None:
        if not -0.5 < self.alpha < 0.0:
            raise ValueError("alpha must lie in (-1/2, 0)")


@dataclass(frozen=True)
class C2Source:
    """0/1 prefix followed by the tail 1, 1, 0, 1, 0, 1, ..."""

    prefix: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        pre = tuple(int(v) for v in self.prefix)
        object.__setattr__(self, "prefix", pre)
        if any(v not in (0, 1) for v in pre):
            raise ValueError("prefix entries must be 0 or 1")


ProfileSource = Union[IidSource, ExplicitSource, CondorcetSource, MoaSource, C1Source, C2Source]


@dataclass
class Profile:
    competences: np.ndarray
    source: ProfileSource
    seed: int | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.competences, dtype=float)
        if p.ndim != 1:
            raise ValueError("competences must be one-dimensional")
        if np.any((p < 0.0) | (p > 1.0)):
            raise ValueError("competences must lie in [0,1]")
        self.competences = p

    @property
    def n(self) -> int:
        return len(self.competences)


class DegenerateProfileError(ValueError):
    """All competences in {0,1}: the drift statistic is undefined."""


def _require_odd(n: int) -> None:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"voter count must be odd and positive, got {n}")


def _family_values(source: ProfileSource, n: int, seed: int) -> np.ndarray:
    if isinstance(source, IidSource):
        u = streams.uniforms(seed, (_IID_TAG,), n)
        return np.asarray(quantile(source.measure, u), dtype=float)
    if isinstance(source, ExplicitSource):
        if len(source.competences) < n:
            raise ValueError(f"explicit source has {len(source.competences)} < {n} entries")
        return np.asarray(source.competences[:n], dtype=float)
    if isinstance(source, CondorcetSource):
        return np.full(n, 0.5 + source.eps)
    if isinstance(source, MoaSource):
        informed = int(np.floor(source.informed_fraction * n))
        p = np.full(n, 0.5)
        p[:informed] = 1.0
        return p
    if isinstance(source, C1Source):
        i = np.arange(1, n + 1, dtype=float)
        return 0.5 + np.minimum(i**source.alpha, 0.5)
    if isinstance(source, C2Source):
        m = len(source.prefix)
        p = np.empty(n, dtype=float)
        p[:min(m, n)] = source.prefix[:n]
        tail = n - m
        if tail > 0:
            j = np.arange(1, tail + 1)
            p[m:] = np.where(j == 1, 1.0, (j % 2 == 0).astype(float))
        return p
    raise TypeError(f"unknown profile source {type(source).__name__}")


def generate(source: ProfileSource, n: int, seed: int = 0) -> Profile:
    """Deterministic profile of odd length n for (source, seed).

    The iid variant inverts the measure's CDF at per-index substream
    uniforms, so p_i depends on (seed, i) only and a longer profile
    extends a shorter one.
    """
    _require_odd(n)
    return Profile(_family_values(source, n, seed), source, seed)


def q_statistic(profile: Profile) -> float:
    """(sum p_i - n/2) / sqrt(sum p_i q_i)."""
    p = profile.competences
    pq = float(np.sum(p * (1.0 - p)))
    if pq <= 0.0:
        raise DegenerateProfileError(
            "all competences are 0 or 1; fall back to the informed-count condition"
        )
    return float((np.sum(p) - 0.5 * len(p)) / np.sqrt(pq))


def condition_two_holds(profile: Profile, n0: int = 1) -> bool:
    """True iff the perfectly-informed count S_k exceeds k/2 at every odd
    k from n0 through n (exact equality test p_i == 1)."""
    n = profile.n
    if n0 > n:
        raise ValueError(f"n0={n0} exceeds profile length {n}")
    ones = np.cumsum(profile.competences == 1.0)
    ks = np.arange(n0 if n0 % 2 == 1 else n0 + 1, n + 1, 2)
    return bool(np.all(ones[ks - 1] > 0.5 * ks))


@dataclass
class ConditionReport:
    checkpoints: np.ndarray
    q_trace: np.ndarray
    s_trace: np.ndarray
    running_mean: np.ndarray
    chebyshev_bounds: np.ndarray
    gen_cent: np.ndarray
    gen_noconc: np.ndarray
    gen_eps1: np.ndarray
    sigma_t: np.ndarray

    FIELDS = (
        "checkpoint",
        "q",
        "s_minus_half",
        "running_mean",
        "chebyshev_bound",
        "gen_cent",
        "gen_noconc",
        "gen_eps1",
        "sigma_t",
    )

    def rows(self) -> list[tuple]:
        cols = (
            self.q_trace,
            self.s_trace,
            self.running_mean,
            self.chebyshev_bounds,
            self.gen_cent,
            self.gen_noconc,
            self.gen_eps1,
            self.sigma_t,
        )
        return [
            (int(self.checkpoints[i]),) + tuple(float(col[i]) for col in cols)
            for i in range(len(self.checkpoints))
        ]


def condition_report(
    source: ProfileSource, checkpoints: tuple[int, ...] | list[int], seed: int = 0
) -> ConditionReport:
    """Finite-horizon traces of the majority-reliability diagnostics.

    Realization-level traces (Q_k, informed-count margin, running mean,
    Chebyshev bound) use the generated profile; the generalized traces
    use the per-index means, which are closed-form for the analytic
    families and measure moments for iid draws.  Chebyshev bounds are
    NaN where the mean competence does not exceed 1/2.
    """
    ks = np.asarray(list(checkpoints), dtype=int)
    if len(ks) == 0 or np.any(ks[1:] <= ks[:-1]):
        raise ValueError("checkpoints must be strictly increasing")
    if np.any(ks % 2 == 0) or ks[0] < 1:
        raise ValueError("checkpoints must be odd and positive")
    n = int(ks[-1])
    profile = generate(source, n, seed)
    p = profile.competences
    cum_p = np.cumsum(p)
    cum_pq = np.cumsum(p * (1.0 - p))
    cum_ones = np.cumsum(p == 1.0)
    if isinstance(source, IidSource):
        m1 = moment(source.measure, 1)
        m2 = moment(source.measure, 2)
        e1 = atom_mass(source.measure, 1.0)
        mean_i = np.full(n, m1)
        noconc_i = np.full(n, m1 - m2)
        eps1_i = np.full(n, e1)
        var_i = np.full(n, m2 - m1 * m1)
    else:
        mean_i = p
        noconc_i = p * (1.0 - p)
        eps1_i = (p == 1.0).astype(float)
        var_i = np.zeros(n)
    cum_mean = np.cumsum(mean_i)
    cum_noconc = np.cumsum(noconc_i)
    cum_eps1 = np.cumsum(eps1_i)
    cum_var = np.cumsum(var_i)

    idx = ks - 1
    kf = ks.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(cum_pq[idx] > 0.0, (cum_p[idx] - 0.5 * kf) / np.sqrt(cum_pq[idx]), np.nan)
        drift = cum_p[idx] - 0.5 * kf
        cheb = np.where(drift > 0.0, cum_pq[idx] / drift**2, np.nan)
    return ConditionReport(
        checkpoints=ks,
        q_trace=q,
        s_trace=cum_ones[idx] - 0.5 * kf,
        running_mean=cum_p[idx] / kf,
        chebyshev_bounds=cheb,
        gen_cent=(cum_mean[idx] - 0.5 * kf) / np.sqrt(kf),
        gen_noconc=cum_noconc[idx] / kf,
        gen_eps1=cum_eps1[idx] / kf,
        sigma_t=np.sqrt(cum_var[idx]),
    )


def geometric_checkpoints(n0: int, n_max: int, factor: float = 2.0) -> tuple[int, ...]:
    """Odd checkpoints n0, ~n0*factor, ... capped at n_max."""
    if n0 < 1 or n0 % 2 == 0:
        raise ValueError("n0 must be odd and positive")
    out = []
    x = float(n0)
    while True:
        k = int(round(x))
        k += 1 - k % 2
        k = min(k, n_max if n_max % 2 == 1 else n_max - 1)
        if not out or k > out[-1]:
            out.append(k)
        if k >= n_max - 1:
            break
        x *= factor
    return tuple(out)
