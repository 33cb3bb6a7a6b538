"""Brute-force edge posteriors by summing over every linear order.

Shares no lattice or transform code with :mod:`edgepost.engine`; only the
dataset, the prior factors and the local score are common.
"""
import math
from functools import reduce
from itertools import combinations, permutations

import numpy as np

from .exceptions import CapExceededError
from .mobius import BOTTOM, log_sum
from .model import local_marginal_likelihood, q, rho
from .results import EdgePosteriors

ORACLE_MAX_N = 6


def _logsum_all(values):
    return reduce(log_sum, values, BOTTOM)


class _Families:
    """Memoised ``alpha_i(U)``, optionally restricted to parent sets containing ``u``."""

    def __init__(self, data, spec, beta_shift=None):
        self.data = data
        self.spec = spec
        self.n = data.n
        self.beta_shift = beta_shift or {}
        self._beta = {}
        self._alpha = {}

    def beta(self, i, parents):
        key = (i, parents)
        if key not in self._beta:
            mask = sum(1 << u for u in parents)
            value = rho(i, mask, self.spec, self.n) + local_marginal_likelihood(
                self.data, i, parents, self.spec.score, self.spec.ess
            )
            self._beta[key] = value + self.beta_shift.get(key, 0.0)
        return self._beta[key]

    def alpha(self, i, preds, required=None):
        key = (i, preds, required)
        if key not in self._alpha:
            terms = []
            for size in range(min(self.spec.k, len(preds)) + 1):
                for parents in combinations(preds, size):
                    if required is not None and required not in parents:
                        continue
                    terms.append(self.beta(i, parents))
            self._alpha[key] = q(i, preds, self.spec) + _logsum_all(terms)
        return self._alpha[key]


def _check(data):
    if data.n > ORACLE_MAX_N:
        raise CapExceededError(f"brute-force oracle limited to n <= {ORACLE_MAX_N}, got {data.n}")


def brute_marginal(data, spec, beta_shift=None):
    """Log of the sum over all orders of the product of candidate-parent scores."""
    _check(data)
    spec = spec.for_nodes(data.n)
    fam = _Families(data, spec, beta_shift)
    total = BOTTOM
    for order in permutations(range(data.n)):
        logp = 0.0
        for pos, i in enumerate(order):
            logp += fam.alpha(i, tuple(sorted(order[:pos])))
        total = log_sum(total, logp)
    return total


def brute_posteriors(data, spec, beta_shift=None):
    """Edge posteriors by exhaustive order enumeration.

    ``beta_shift`` maps ``(node, parents_tuple)`` to an additive log offset on
    that family score; used to test the verifier's sensitivity.
    """
    _check(data)
    spec = spec.for_nodes(data.n)
    n = data.n
    fam = _Families(data, spec, beta_shift)
    total = BOTTOM
    joint = np.full((n, n), BOTTOM)
    for order in permutations(range(n)):
        preds = [None] * n
        for pos, i in enumerate(order):
            preds[i] = tuple(sorted(order[:pos]))
        factors = [fam.alpha(i, preds[i]) for i in range(n)]
        logp = sum(factors)
        total = log_sum(total, logp)
        for v in range(n):
            if factors[v] == BOTTOM:
                continue
            others = sum(factors[:v]) + sum(factors[v + 1:])
            for u in preds[v]:
                restricted = fam.alpha(v, preds[v], required=u)
                joint[u, v] = log_sum(joint[u, v], others + restricted)
    matrix = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            if u != v and joint[u, v] != BOTTOM:
                matrix[u, v] = math.exp(joint[u, v] - total)
    return EdgePosteriors(matrix, total, names=data.names, spec=spec)
