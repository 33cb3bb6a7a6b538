"""Log-domain zeta/Möbius transforms over the subset lattice.

Tables are 1-D float arrays of length ``2**n`` indexed by subset mask, each
entry the natural log of a nonnegative number (``-inf`` encodes zero).

The fast transforms run ``n`` in-place coordinate sweeps, bit 0 first. They
overwrite and return the array they are given; pass a copy if the input is
still needed.
"""
import math

import numpy as np

from .exceptions import CapExceededError, PreconditionError
from .lattice import binomial_tail, popcount_table

BOTTOM = -math.inf

NAIVE_MAX_N = 14


def log_sum(a, b):
    """``log(exp(a) + exp(b))`` without overflow; ``-inf`` is the identity."""
    if a == BOTTOM:
        return b
    if b == BOTTOM:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def _table(s):
    t = np.ascontiguousarray(s, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("lattice table must be one-dimensional")
    size = t.shape[0]
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError(f"lattice table length {size} is not a power of two")
    return t, n


def truncated_downward_work(n, k):
    """Entries touched by :func:`downward_transform_truncated`: sum of ``2**(n-i) B(i, k)``."""
    return sum((1 << (n - i)) * binomial_tail(i, min(k, i)) for i in range(1, n + 1))


def downward_transform_truncated(s, k, stats=None):
    """Superset sums ``t(T) = log sum_{S >= T} exp s(S)``, valid for ``|T| <= k``.

    Entries at sets larger than ``k`` are left holding partial sums and must
    not be read. If ``stats`` is a dict, ``stats["ops"]`` is incremented by
    the number of table entries evaluated across all sweeps.
    """
    t, n = _table(s)
    pc = popcount_table(n)
    ops = 0
    for b in range(n):
        width = 1 << b
        t3 = t.reshape(-1, 2, width)
        height = t3.shape[0]
        if k >= b:
            np.logaddexp(t3[:, 0, :], t3[:, 1, :], out=t3[:, 0, :])
            n_zero = width
        else:
            low = np.flatnonzero(pc[:width] <= k)
            t3[:, 0, low] = np.logaddexp(t3[:, 0, low], t3[:, 1, low])
            n_zero = low.size
        # entries with bit b set are carried over unchanged when their prefix fits
        n_one = width if k >= b + 1 else int(np.count_nonzero(pc[:width] <= k - 1))
        ops += height * (n_zero + n_one)
    if stats is not None:
        stats["ops"] = stats.get("ops", 0) + ops
    return t


def upward_transform_truncated(s, k, stats=None):
    """Subset sums ``t(T) = log sum_{S <= T} exp s(S)`` for every ``T``.

    ``s`` must be ``-inf`` at every set with more than ``k`` elements; sweeps
    skip intermediate entries that are known to be zero for that reason.
    """
    t, n = _table(s)
    pc = popcount_table(n)
    if np.any(t[pc > k] != BOTTOM):
        raise PreconditionError(
            f"upward truncated transform needs s = -inf above cardinality {k}"
        )
    ops = 0
    for b in range(n):
        width = 1 << b
        t3 = t.reshape(-1, 2, width)
        height = t3.shape[0]
        if k >= n - b - 1:
            np.logaddexp(t3[:, 1, :], t3[:, 0, :], out=t3[:, 1, :])
            ops += height * width
        else:
            high = np.flatnonzero(pc[:height] <= k)
            t3[high, 1, :] = np.logaddexp(t3[high, 1, :], t3[high, 0, :])
            ops += high.size * width
    if stats is not None:
        stats["ops"] = stats.get("ops", 0) + ops
    return t


def _naive_logsum(values):
    if values.size == 0:
        return BOTTOM
    top = values.max()
    if top == BOTTOM:
        return BOTTOM
    return float(top + math.log(np.sum(np.exp(values - top))))


def _naive(s, superset):
    s = np.asarray(s, dtype=np.float64)
    _, n = _table(s)
    if n > NAIVE_MAX_N:
        raise CapExceededError(f"naive transform limited to n <= {NAIVE_MAX_N}, got {n}")
    masks = np.arange(s.size)
    out = np.empty_like(s)
    for T in range(s.size):
        if superset:
            sel = (masks & T) == T
        else:
            sel = (masks | T) == T
        out[T] = _naive_logsum(s[sel])
    return out


def naive_downward(s):
    """Definitional O(3^n) superset sum, used as a test oracle."""
    return _naive(s, superset=True)


def naive_upward(s):
    """Definitional O(3^n) subset sum, used as a test oracle."""
    return _naive(s, superset=False)
