"""
Min/max K-partition candidate-knot selection.

The year-ordered responses are cut into ``K`` consecutive blocks of
``L = n // K`` observations. Within each block the observation whose response
lies farthest from the block mean nominates its predictor value as a knot.
Trailing observations beyond ``K * L`` never nominate a knot but still take
part in every regression fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Knot, KnotSet
from .exceptions import ContractError

# Deviations closer than this many ulps of the block's magnitude count as tied.
TIE_ULPS = 64


@dataclass(frozen=True)
class Partition:
    index: int
    members: range
    mean: float


def partition_indices(n: int, K: int):
    """Split ``range(n)`` into ``K`` equal consecutive blocks.

    Returns
    -------
    blocks : list of range
        ``K`` ranges of length ``n // K``.
    remainder : range
        Indices ``K * (n // K) .. n - 1``; possibly empty.
    """
    if not 1 <= K <= n:
        raise ContractError(f"need 1 <= K <= n, got K={K}, n={n}")
    L = n // K
    blocks = [range(k * L, (k + 1) * L) for k in range(K)]
    return blocks, range(K * L, n)


def partition_mean(y, members: range) -> float:
    y = np.asarray(y, dtype=float)
    if members.start < 0 or members.stop > y.size or len(members) == 0:
        raise ContractError(f"range {members} outside 0..{y.size - 1}")
    return float(np.mean(y[members.start:members.stop]))


def partitions(y, K: int):
    """Build the :class:`Partition` records for ``y``."""
    y = np.asarray(y, dtype=float)
    blocks, _ = partition_indices(y.size, K)
    return [Partition(k, r, partition_mean(y, r)) for k, r in enumerate(blocks)]


def _farthest_from_mean(block: np.ndarray, mean: float) -> int:
    dev = np.abs(block - mean)
    info = np.finfo(float)
    magnitude = max(float(np.max(np.abs(block))), abs(mean))
    # relative roundoff, but never finer than the subnormal spacing
    tol = TIE_ULPS * max(info.eps * magnitude, info.smallest_subnormal)
    # first index within roundoff of the maximum deviation
    return int(np.flatnonzero(dev >= dev.max() - tol)[0])


def select_knots(x, y, K: int) -> KnotSet:
    """Nominate one candidate knot per partition.

    Parameters
    ----------
    x : array_like, shape (n,)
        Predictor values in year order; knots are drawn from these.
    y : array_like, shape (n,)
        Responses in the same order; only these decide which index wins.
    K : int
        Number of partitions, ``1 <= K <= n``.

    Returns
    -------
    KnotSet
        At most ``K`` knots, deduplicated and without any knot at ``max(x)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ContractError(f"x and y differ in length ({x.size} vs {y.size})")
    candidates = []
    for part in partitions(y, K):
        r = part.members
        idx = r.start + _farthest_from_mean(y[r.start:r.stop], part.mean)
        candidates.append(Knot(location=float(x[idx]), partition=part.index, source=idx))
    return KnotSet.from_candidates(candidates, x_max=float(x.max()))
