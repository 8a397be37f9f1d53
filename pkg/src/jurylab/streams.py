"""Deterministic counter-based random substreams.

Every stochastic kernel in the package derives its randomness from a
64-bit seed through keyed SplitMix64 streams.  A (seed, *path) pair maps
to one stream; distinct paths give statistically independent streams, so
profiles, Monte Carlo replicas and parallel workers can each own a
substream without any shared mutable state.  Results therefore never
depend on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = float(2.0**-53)


def _mix64(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer; wraps mod 2^64."""
    with np.errstate(over="ignore"):
        z = (z + _GAMMA) & np.uint64(_U64_MASK)
        z = ((z ^ (z >> np.uint64(30))) * _MIX1) & np.uint64(_U64_MASK)
        z = ((z ^ (z >> np.uint64(27))) * _MIX2) & np.uint64(_U64_MASK)
        return z ^ (z >> np.uint64(31))


def stream_key(seed: int, *path: int) -> int:
    """Collapse (seed, *path) into one 64-bit stream key."""
    key = _mix64(np.uint64(seed & _U64_MASK))
    for part in path:
        key = _mix64(key ^ np.uint64(part & _U64_MASK))
    return int(key)


def uniforms(seed: int, path: tuple[int, ...], count: int, start: int = 0) -> np.ndarray:
    """`count` uniforms in [0,1) at absolute indices start..start+count-1.

    Counter-based: index i always yields the same value for a given
    (seed, path), independent of how draws are batched.
    """
    key = np.uint64(stream_key(seed, *path))
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = _mix64(key + idx * _GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniforms_block(
    seed: int,
    path: tuple[int, ...],
    rows: np.ndarray,
    cols: int,
    col_start: int = 0,
) -> np.ndarray:
    """(len(rows), cols) uniforms; row r is the substream (path..., r).

    Used for replica-indexed Monte Carlo: each row is an independent
    per-replica stream, and extending `cols` extends every row in place.
    """
    key = np.uint64(stream_key(seed, *path))
    with np.errstate(over="ignore"):
        row_keys = _mix64(key + np.asarray(rows, dtype=np.uint64) * _GAMMA)
        idx = np.arange(col_start, col_start + cols, dtype=np.uint64)
        bits = _mix64(row_keys[:, None] + idx[None, :] * _GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53


def generator(seed: int, *path: int) -> np.random.Generator:
    """A numpy Generator seeded from the (seed, *path) substream."""
    return np.random.default_rng(stream_key(seed, *path))
