"""Exact all-edges posterior probabilities by forward-backward summation over orders.

Steps, all in the log domain:

1. family scores ``beta_i(G)`` for ``|G| <= k``,
2. ``alpha_i(U) = q + logsum_{G <= U} beta_i(G)`` by a truncated subset-sum transform,
3. forward table ``L(S)`` over all node sets,
4. backward table ``R(T)`` over all node sets,
5. per head node ``v``: ``gamma_v(G)`` by a truncated superset-sum transform of
   ``q + L(S) + R(V - v - S)``, then one restricted sum per tail node ``u``.

Per-node arrays over subsets of ``V - {i}`` use compressed indexing: bit ``i``
is deleted and higher bits shift down (see :func:`edgepost.lattice.drop_bit`).
"""
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .lattice import ProblemDims, drop_bit, insert_bit, masks_by_level
from .mobius import BOTTOM, downward_transform_truncated, upward_transform_truncated
from .model import compute_beta
from .results import EdgePosteriors

#: every internal identity check uses this absolute log-domain tolerance
LOG_TOL = 1e-9


@dataclass
class ForwardBackward:
    L: np.ndarray
    R: np.ndarray

    @property
    def log_marginal(self):
        return float(self.L[-1])


def _scatter_beta(table, n, k):
    """Dense compressed-index array of one node's family scores, -inf elsewhere."""
    out = np.full(1 << (n - 1), BOTTOM)
    out[drop_bit(table.parents, table.node)] = table.scores
    return out


def compute_alpha(beta, k, log_q=0.0):
    """Candidate-parent scores, shape ``(n, 2**(n-1))`` in compressed indexing."""
    n = len(beta)
    alpha = np.empty((n, 1 << (n - 1)))
    for table in beta:
        row = upward_transform_truncated(_scatter_beta(table, n, k), k)
        alpha[table.node] = row + log_q
    return alpha


def forward(alpha):
    """``L(S) = logsum_{i in S} alpha_i(S - i) + L(S - i)``, ``L(empty) = 0``."""
    n = alpha.shape[0]
    L = np.full(1 << n, BOTTOM)
    L[0] = 0.0
    levels = masks_by_level(n)
    for level in range(1, n + 1):
        S = levels[level]
        acc = np.full(S.size, BOTTOM)
        for i in range(n):
            has = ((S >> i) & 1).astype(bool)
            prev = S[has] ^ (1 << i)
            term = alpha[i, drop_bit(prev, i)] + L[prev]
            acc[has] = np.logaddexp(acc[has], term)
        L[S] = acc
    return L


def backward(alpha):
    """``R(T) = logsum_{i in T} alpha_i(V - T - i) + R(T - i)``, ``R(empty) = 0``."""
    n = alpha.shape[0]
    full = (1 << n) - 1
    R = np.full(1 << n, BOTTOM)
    R[0] = 0.0
    levels = masks_by_level(n)
    for level in range(1, n + 1):
        T = levels[level]
        acc = np.full(T.size, BOTTOM)
        for i in range(n):
            has = ((T >> i) & 1).astype(bool)
            Ti = T[has]
            prev = Ti ^ (1 << i)
            term = alpha[i, drop_bit(full ^ Ti, i)] + R[prev]
            acc[has] = np.logaddexp(acc[has], term)
        R[T] = acc
    return R


def forward_backward(alpha):
    return ForwardBackward(forward(alpha), backward(alpha))


def gamma_input(v, fb, log_q=0.0, out=None):
    """``q + L(S) + R(V - v - S)`` over subsets ``S`` of ``V - {v}``, compressed."""
    n = fb.L.size.bit_length() - 1
    rest = ((1 << n) - 1) ^ (1 << v)
    S = insert_bit(np.arange(1 << (n - 1), dtype=np.int64), v)
    if out is None:
        out = np.empty(1 << (n - 1))
    np.add(fb.L[S], fb.R[rest ^ S], out=out)
    out += log_q
    return out


def compute_gamma(v, fb, k, log_q=0.0, out=None):
    """Superset sums of :func:`gamma_input`, valid at sets with at most ``k`` nodes.

    Returned in compressed indexing over ``V - {v}``; entries above ``k`` are
    unspecified.
    """
    return downward_transform_truncated(gamma_input(v, fb, log_q, out), k)


def family_weights(table, gamma):
    """``beta_v(G) + gamma_v(G)`` for each admissible parent set of the node."""
    return table.scores + gamma[drop_bit(table.parents, table.node)]


def edge_log_joint(table, gamma, n):
    """Log joint of data and edge ``(u, v)`` for every ``u``; ``-inf`` at ``u = v``."""
    weights = family_weights(table, gamma)
    member = ((table.parents[:, None] >> np.arange(n)) & 1).astype(bool)
    return logsumexp(np.where(member, weights[:, None], BOTTOM), axis=0)


def posteriors_from_beta(beta, k, log_q=0.0):
    """Run steps 2-5 on precomputed family scores.

    Returns ``(matrix, log_marginal)``.
    """
    n = len(beta)
    alpha = compute_alpha(beta, k, log_q)
    fb = forward_backward(alpha)
    del alpha
    log_marginal = fb.log_marginal
    matrix = np.zeros((n, n))
    if n == 1:
        return matrix, log_marginal
    buffer = np.empty(1 << (n - 1))
    for table in beta:
        v = table.node
        gamma = compute_gamma(v, fb, k, log_q, out=buffer)
        matrix[:, v] = np.exp(edge_log_joint(table, gamma, n) - log_marginal)
    np.clip(matrix, 0.0, 1.0, out=matrix)
    np.fill_diagonal(matrix, 0.0)
    return matrix, log_marginal


def edge_posteriors(data, spec, allow_large=False):
    """Posterior probability of every directed edge given complete data."""
    start = time.perf_counter()
    spec = spec.for_nodes(data.n)
    ProblemDims(data.n, spec.k, allow_large)
    beta = compute_beta(data, spec)
    matrix, log_marginal = posteriors_from_beta(beta, spec.k)
    elapsed = (time.perf_counter() - start) * 1000.0
    return EdgePosteriors(
        matrix=matrix,
        log_marginal=log_marginal,
        names=data.names,
        spec=spec,
        elapsed_ms=elapsed,
    )


def check_identities(beta, k, log_q=0.0):
    """Largest deviations of the forward-backward and total-probability identities.

    Returns a dict with keys ``forward_backward``, ``total_probability`` and
    ``left_right`` (``|L(V) - R(V)|``).
    """
    n = len(beta)
    alpha = compute_alpha(beta, k, log_q)
    fb = forward_backward(alpha)
    z = fb.log_marginal
    worst_fb = 0.0
    worst_total = 0.0
    for table in beta:
        v = table.node
        h = gamma_input(v, fb, 0.0)
        worst_fb = max(worst_fb, abs(logsumexp(alpha[v] + h) - z))
        gamma = compute_gamma(v, fb, k, log_q)
        worst_total = max(worst_total, abs(logsumexp(family_weights(table, gamma)) - z))
    return {
        "forward_backward": worst_fb,
        "total_probability": worst_total,
        "left_right": abs(fb.L[-1] - fb.R[-1]),
    }
