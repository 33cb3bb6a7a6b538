"""Randomised agreement check between the fast engine and the brute-force oracle."""
from dataclasses import dataclass

import numpy as np

from .engine import edge_posteriors
from .model import Dataset, PriorSpec
from .oracle import brute_posteriors
from .study import derive_seed

_PRIOR_GRID = (
    ("cardinality_uniform", "dirichlet_all_ones"),
    ("flat", "dirichlet_all_ones"),
    ("cardinality_uniform", "bdeu"),
    ("flat", "bdeu"),
)


@dataclass
class Instance:
    data: Dataset
    spec: PriorSpec
    seed: int

    def to_dict(self):
        return {
            "seed": self.seed,
            "names": list(self.data.names),
            "arities": self.data.arities.tolist(),
            "records": self.data.records.tolist(),
            "prior": self.spec.as_dict() | {"ess": self.spec.ess},
        }

    @classmethod
    def from_dict(cls, d):
        n = len(d["names"])
        records = np.asarray(d["records"], dtype=np.int64).reshape(-1, n)
        data = Dataset(tuple(d["names"]), d["arities"], records)
        p = d["prior"]
        spec = PriorSpec(int(p["k"]), rho=p["rho"], q=p["q"], score=p["score"], ess=p["ess"])
        return cls(data, spec, d.get("seed"))


def random_instance(seed, n_max=5, m_max=30, index=0):
    """One fuzz instance: ``n`` in 2..n_max, ``m`` in 0..m_max, ``r`` in {2, 3}, any ``k``."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    k = int(rng.integers(0, n))
    r = int(rng.choice([2, 3]))
    rho, score = _PRIOR_GRID[index % len(_PRIOR_GRID)]
    ess = float(rng.uniform(0.5, 10.0))
    records = rng.integers(0, r, size=(m, n))
    data = Dataset(tuple(f"x{i}" for i in range(n)), [r] * n, records)
    return Instance(data, PriorSpec(k, rho=rho, score=score, ess=ess), seed)


def compare(instance, perturb=0.0):
    """Worst posterior and log-marginal discrepancy of engine against oracle.

    ``perturb`` shifts the oracle's score of node 0 with no parents, which a
    working comparison must detect.
    """
    shift = {(0, ()): perturb} if perturb else None
    fast = edge_posteriors(instance.data, instance.spec)
    slow = brute_posteriors(instance.data, instance.spec, beta_shift=shift)
    return (
        float(np.max(np.abs(fast.matrix - slow.matrix))),
        abs(fast.log_marginal - slow.log_marginal),
    )


def agreement_suite(instances=50, n_max=5, seed=0, perturb=0.0):
    """Yield ``(instance, posterior_error, marginal_error)`` for each fuzz instance."""
    for i in range(instances):
        inst = random_instance(derive_seed(seed, i), n_max=n_max, index=i)
        post_err, marg_err = compare(inst, perturb)
        yield inst, post_err, marg_err
