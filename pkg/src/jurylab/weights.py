"""Weight schemes and the stochastic bounded-weight machinery.

Deterministic schemes: unit weights, an expert threshold rule, clamped
log-odds, and the bounded polynomial w_d(p) = 1 + (W-1)*p^k that rises
from 1 to W.  The stochastic scheme adds a truncated-Gaussian error to
w_d whose truncation interval (1 - w_d(p), W - w_d(p)) pins the total
weight inside [1, W], so no voter ever drops below unit weight.

The analytic side evaluates the truncated-normal conditional mean, the
sharpness factor f(x, p) with x = (W-1)/sigma, the moment criterion
2 m^{k+1} - m^k that certifies a usable exponent k, and the per-voter
drift of the weighted tally under a competence measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special, stats

from .measure import MeasureSpec, moment
from .quadrature import integrate

__all__ = [
    "UnitWeights",
    "ExpertRule",
    "LogOdds",
    "BoundedPoly",
    "StochasticPoly",
    "WeightScheme",
    "TruncatedGaussianSpec",
    "deterministic_weight",
    "sample_weight",
    "truncated_normal_mean",
    "f_function",
    "moment_criterion",
    "find_k",
    "drift",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class UnitWeights:
    pass


@dataclass(frozen=True)
class ExpertRule:
    """Weight 1 for p >= threshold, 0 otherwise."""

    threshold: float

    def __post_init__(self) -> None:
        if not 0.5 < self.threshold <= 1.0:
            raise ValueError("expert threshold must lie in (1/2, 1]")


@dataclass(frozen=True)
class LogOdds:
    """log(p / (1-p)) with p clamped into [clamp, 1-clamp].

    The raw rule diverges at p in {0, 1}, hence the clamp.
    """

    clamp: float = 1e-6

    def __post_init__(self) -> None:
        if not 0.0 < self.clamp < 0.5:
            raise ValueError("clamp must lie in (0, 1/2)")


@dataclass(frozen=True)
class BoundedPoly:
    """w_d(p) = 1 + (W-1) * p^k, increasing from 1 to W."""

    W: float
    k: int

    def __post_init__(self) -> None:
        if not self.W > 1.0:
            raise ValueError("W must exceed 1")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be an integer >= 1")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class StochasticPoly(BoundedPoly):
    """Bounded polynomial weight plus truncated-Gaussian error.

    The noise scale relative to the weight range is summarized by the
    diagnostic x = (W-1)/sigma_w; the larger x, the closer the scheme
    tracks its deterministic part.
    """

    sigma_w: float = 1.0

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.sigma_w > 0.0:
            raise ValueError("sigma_w must be positive")

    @property
    def x(self) -> float:
        return (self.W - 1.0) / self.sigma_w


WeightScheme = Union[UnitWeights, ExpertRule, LogOdds, BoundedPoly, StochasticPoly]


@dataclass(frozen=True)
class TruncatedGaussianSpec:
    """Zero-mean normal with scale sigma conditioned to (a, b)."""

    sigma: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not self.a < self.b:
            raise ValueError("need a < b")


def deterministic_weight(scheme: WeightScheme, p: np.ndarray | float) -> np.ndarray | float:
    """The deterministic weight of a voter with competence p."""
    arr = np.asarray(p, dtype=float)
    if isinstance(scheme, UnitWeights):
        out = np.ones_like(arr)
    elif isinstance(scheme, ExpertRule):
        out = (arr >= scheme.threshold).astype(float)
    elif isinstance(scheme, LogOdds):
        clamped = np.clip(arr, scheme.clamp, 1.0 - scheme.clamp)
        out = np.log(clamped / (1.0 - clamped))
    elif isinstance(scheme, BoundedPoly):
        out = 1.0 + (scheme.W - 1.0) * arr**scheme.k
    else:
        raise TypeError(f"unknown weight scheme {type(scheme).__name__}")
    return out if np.ndim(p) else float(out)


def _std_truncnorm_mean(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Mean of a standard normal conditioned to (alpha, beta).

    Stable for |alpha|, |beta| well past 38: same-tail intervals go
    through scaled erfcx so the common exp(-alpha^2/2) factor cancels
    instead of underflowing; near-degenerate intervals collapse to the
    midpoint.  Never returns NaN for alpha < beta.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    with np.errstate(invalid="ignore"):
        flip = alpha + beta > 0.0  # NaN midpoint (two-sided infinite) stays unflipped
    a = np.where(flip, -beta, alpha)
    b = np.where(flip, -alpha, beta)
    # now a + b <= 0 and a <= 0; only the far left tail needs rescaling
    narrow = np.isfinite(a) & np.isfinite(b) & (b - a < 1e-7)
    left_tail = ~narrow & (b < -5.0)
    mild = ~(narrow | left_tail)

    out = np.empty(np.broadcast(a, b).shape, dtype=float)

    if np.any(mild):
        am = np.where(mild, a, -1.0)
        bm = np.where(mild, b, 1.0)
        num = _phi(am) - _phi(bm)
        den = special.ndtr(bm) - special.ndtr(am)
        out[mild] = (num / np.maximum(den, 1e-300))[mild]

    if np.any(left_tail):
        # mirror to the right tail: mean(a, b) = -mean(-b, -a)
        lo = np.where(left_tail, -b, 6.0)
        hi = np.where(left_tail, -a, 7.0)
        finite_hi = np.isfinite(hi)
        delta = np.where(finite_hi, 0.5 * (hi - lo) * (hi + lo), np.inf)
        damp = np.exp(-delta)
        num = 1.0 - damp
        den = special.erfcx(lo / _SQRT2) - damp * special.erfcx(
            np.where(finite_hi, hi, 0.0) / _SQRT2
        )
        out[left_tail] = (-_SQRT_2_PI * num / den)[left_tail]

    if np.any(narrow):
        out[narrow] = (0.5 * (a + b))[narrow]
    return np.where(flip, -out, out)


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def truncated_normal_mean(spec: TruncatedGaussianSpec) -> float:
    """sigma * (phi(alpha) - phi(beta)) / (Phi(beta) - Phi(alpha))."""
    alpha = spec.a / spec.sigma
    beta = spec.b / spec.sigma
    return float(spec.sigma * _std_truncnorm_mean(np.asarray(alpha), np.asarray(beta)))


def f_function(x: float, p: np.ndarray | float) -> np.ndarray | float:
    """(phi((1-p)x) - phi(-px)) / (x (Phi(-px) - Phi((1-p)x))), x > 0.

    Scaled so that (W-1) * f(x, p) is the conditional error mean of a
    zero-mean Gaussian with sigma = (W-1)/x truncated to
    (-(W-1)p, (W-1)(1-p)).  Evaluated directly; for p in [0,1] the
    truncation interval straddles zero, so the denominator never
    suffers tail cancellation and the value is NaN-free.
    """
    if not x > 0.0:
        raise ValueError("x must be positive")
    arr = np.asarray(p, dtype=float)
    lo = -arr * x
    hi = (1.0 - arr) * x
    num = _phi(hi) - _phi(lo)
    den = x * (special.ndtr(lo) - special.ndtr(hi))
    small = np.abs(den) < 1e-300
    out = np.where(small, 0.5 * (lo + hi) / x, num / np.where(small, 1.0, den))
    return out if np.ndim(p) else float(out)


def _error_mean(scheme: StochasticPoly, p: np.ndarray) -> np.ndarray:
    """E(error | p) for the truncation interval (1 - w_d, W - w_d)."""
    wd = 1.0 + (scheme.W - 1.0) * p**scheme.k
    alpha = (1.0 - wd) / scheme.sigma_w
    beta = (scheme.W - wd) / scheme.sigma_w
    return scheme.sigma_w * _std_truncnorm_mean(alpha, beta)


def sample_weight(
    scheme: StochasticPoly,
    p: np.ndarray | float,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray | float:
    """Draw w = w_d(p) + error by inverse CDF; always lands in [1, W].

    With scalar p and a size, draws that many weights at one p; with an
    array p (and size None), draws one weight per entry.
    """
    if not isinstance(scheme, StochasticPoly):
        raise TypeError("sample_weight needs a stochastic scheme")
    arr = np.asarray(p, dtype=float)
    if size is not None:
        if arr.ndim != 0:
            raise ValueError("size only applies to scalar p")
        arr = np.full(size, float(arr))
    wd = 1.0 + (scheme.W - 1.0) * arr**scheme.k
    alpha = (1.0 - wd) / scheme.sigma_w
    beta = (scheme.W - wd) / scheme.sigma_w
    u = rng.random(arr.shape)
    eps = scheme.sigma_w * stats.truncnorm.ppf(u, alpha, beta)
    w = np.clip(wd + eps, 1.0, scheme.W)
    return w if (np.ndim(p) or size is not None) else float(w)


def moment_criterion(spec: MeasureSpec, k: int) -> float:
    """2 m^{k+1} - m^k: positive once the exponent k is large enough
    whenever the measure puts mass strictly above 1/2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2.0 * moment(spec, k + 1) - moment(spec, k)


def find_k(spec: MeasureSpec, k_max: int = 64) -> int | None:
    """Smallest k <= k_max with moment_criterion(spec, k) > 1e-12."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    for k in range(1, k_max + 1):
        if moment_criterion(spec, k) > 1e-12:
            return k
    return None


def drift(spec: MeasureSpec, scheme: StochasticPoly, order: int = 64) -> float:
    """Per-voter limit of (1/n) sum w_i (p_i - q_i) under the scheme.

    Closed-form moments carry the deterministic part; the error term
    E[(2p-1) E(eps|p)] is integrated by adaptive Gauss-Legendre panels
    against the density and summed exactly over atoms.  The truncation
    interval is the scheme's own (1 - w_d, W - w_d), so this limit is
    exactly what sampled weights average to.
    """
    if not isinstance(scheme, StochasticPoly):
        raise TypeError("drift needs a stochastic scheme")
    W, k = scheme.W, scheme.k
    base = 2.0 * moment(spec, 1) - 1.0 + (W - 1.0) * moment_criterion(spec, k)

    def integrand(p: np.ndarray) -> np.ndarray:
        return (2.0 * p - 1.0) * _error_mean(scheme, p) * spec.density(p)

    err_term = 0.0
    for lo, hi, _, _ in spec.pieces:
        err_term += integrate(integrand, lo, hi, order=order, abs_tol=1e-12)
    for x, m in spec.atoms:
        err_term += m * (2.0 * x - 1.0) * float(_error_mean(scheme, np.asarray(x)))
    return base + err_term
