"""Bitmask subsets of the attribute index set.

A node set is a plain ``int`` whose bit ``i`` is set when attribute ``i``
belongs to the set. Vectorised helpers operate on ``int64`` arrays of masks.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .exceptions import BinomialOverflowError, CapExceededError, PreconditionError

#: default upper bound on the number of attributes the engine accepts
MAX_NODES = 24
#: bound that applies when the caller explicitly opts in to large problems
MAX_NODES_OVERRIDE = 26

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ProblemDims:
    n: int
    k: int
    allow_large: bool = False

    def __post_init__(self):
        cap = MAX_NODES_OVERRIDE if self.allow_large else MAX_NODES
        if self.n < 1:
            raise ValueError(f"need at least one attribute, got n={self.n}")
        if self.n > cap:
            raise CapExceededError(
                f"n={self.n} exceeds the node cap of {cap}"
                + ("" if self.allow_large else " (use allow_large to raise it)")
            )
        if not 0 <= self.k <= self.n - 1:
            raise ValueError(f"max indegree k={self.k} must lie in [0, {self.n - 1}]")


def check_cap(n, allow_large=False):
    ProblemDims(n, 0, allow_large)


def popcount(x):
    """Number of set bits, for an int or an integer array."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count()
    x = np.asarray(x)
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x).astype(np.int64)
    out = np.zeros(x.shape, dtype=np.int64)
    y = x.astype(np.int64, copy=True)
    while np.any(y):
        out += y & 1
        y >>= 1
    return out


@lru_cache(maxsize=32)
def popcount_table(n):
    """Read-only array of popcounts for all masks below ``2**n``."""
    table = popcount(np.arange(1 << n, dtype=np.int64))
    table.flags.writeable = False
    return table


def members(mask):
    """Sorted list of indices contained in ``mask``."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def from_members(indices):
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def enumerate_subsets(ground, max_size):
    """Yield every subset of ``ground`` with at most ``max_size`` elements.

    Order is ascending cardinality, then ascending mask value.
    """
    elems = members(ground)
    if max_size > len(elems):
        raise PreconditionError(
            f"max_size={max_size} exceeds |ground|={len(elems)}"
        )
    for size in range(max_size + 1):
        level = sorted(from_members(c) for c in combinations(elems, size))
        yield from level


def subsets_array(ground, max_size):
    """The output of :func:`enumerate_subsets` as an ``int64`` array."""
    return np.fromiter(
        enumerate_subsets(ground, min(max_size, popcount(ground))), dtype=np.int64
    )


def drop_bit(masks, i):
    """Delete bit ``i`` and shift higher bits down by one.

    Maps subsets of ``V - {i}`` onto ``range(2**(n-1))``; bit ``i`` of the
    input must be clear.
    """
    low = (1 << i) - 1
    return (masks & low) | ((masks >> (i + 1)) << i)


def insert_bit(compressed, i):
    """Inverse of :func:`drop_bit`: re-open a zero at bit position ``i``."""
    low = (1 << i) - 1
    return (compressed & low) | ((compressed >> i) << (i + 1))


@lru_cache(maxsize=32)
def masks_by_level(n):
    """Tuple of ``n + 1`` arrays; entry ``l`` holds all masks of cardinality ``l``."""
    pc = popcount_table(n)
    order = np.argsort(pc, kind="stable")
    counts = np.bincount(pc, minlength=n + 1)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    levels = []
    for level in range(n + 1):
        arr = order[bounds[level]:bounds[level + 1]].astype(np.int64)
        arr.flags.writeable = False
        levels.append(arr)
    return tuple(levels)


def binomial_tail(n, k):
    """Exact ``sum(C(n, j) for j in 0..k)``; must fit in an unsigned 64-bit word."""
    if not 0 <= k <= n <= 64:
        raise PreconditionError(f"binomial_tail needs 0 <= k <= n <= 64, got n={n}, k={k}")
    total = sum(math.comb(n, j) for j in range(k + 1))
    if total > _UINT64_MAX:
        raise BinomialOverflowError(f"B({n}, {k}) = {total} does not fit in 64 bits")
    return total


def chernoff_tail_bound(n, k):
    """Upper bound ``2**n * exp(-n/4 + k - k**2/n)`` on :func:`binomial_tail`, for n > 2k."""
    if k < 0 or not n > 2 * k:
        raise PreconditionError(f"Chernoff tail bound requires n > 2k >= 0, got n={n}, k={k}")
    return math.ldexp(math.exp(-n / 4 + k - k * k / n), n)
