"""Adaptive Gauss-Legendre panels for piecewise-smooth integrands.

Densities in this package are piecewise affine, so the integrands we
meet (|p-q|, sqrt(p*q), p*log(p/q), truncated-normal factors) are smooth
except at piece boundaries and at density roots.  A fixed-order panel
with bisection-on-disagreement resolves the endpoint sqrt/log
singularities geometrically while staying exact-to-rounding on smooth
panels.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def _nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gl_panel(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, order: int = 20) -> float:
    """Single Gauss-Legendre panel of the given order on [a, b]."""
    x, w = _nodes(order)
    half = 0.5 * (b - a)
    vals = np.asarray(f(0.5 * (a + b) + half * x), dtype=float)
    return half * float(w @ vals)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    order: int = 20,
    abs_tol: float = 1e-13,
    max_depth: int = 48,
) -> float:
    """Adaptive bisection: refine a panel until the split agrees with it.

    abs_tol is an absolute target for the whole interval; each split
    halves the budget so the recursion cannot over-spend it.
    """
    if not b > a:
        return 0.0
    whole = gl_panel(f, a, b, order)
    return _refine(f, a, b, whole, order, abs_tol, max_depth)


def _refine(f, a, b, whole, order, budget, depth) -> float:
    mid = 0.5 * (a + b)
    left = gl_panel(f, a, mid, order)
    right = gl_panel(f, mid, b, order)
    total = left + right
    if depth <= 0 or abs(total - whole) <= budget:
        return total
    half_budget = 0.5 * budget
    return _refine(f, a, mid, left, order, half_budget, depth - 1) + _refine(
        f, mid, b, right, order, half_budget, depth - 1
    )
