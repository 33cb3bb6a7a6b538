"""Data, local marginal likelihoods, and structure priors.

Family scores are kept in the log domain. The default local score is the
Dirichlet-multinomial with all hyperparameters equal to one (the K2 score);
BDeu with an equivalent sample size is available as ``score="bdeu"``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .exceptions import DatasetParseError, ScoreOverflowError
from .lattice import popcount, subsets_array

RHO_FAMILIES = ("cardinality_uniform", "flat")
Q_FAMILIES = ("uniform",)
SCORE_FAMILIES = ("dirichlet_all_ones", "bdeu")

# dense counting is used while q * r_i stays below this; sparse above
_DENSE_COUNT_LIMIT = 1 << 22
_INDEX_LIMIT = 1 << 62


@dataclass(frozen=True, eq=False)
class Dataset:
    """Complete categorical data: ``records[t, i]`` lies in ``range(arities[i])``."""

    names: tuple
    arities: np.ndarray
    records: np.ndarray

    def __post_init__(self):
        records = np.array(self.records, dtype=np.int64, copy=True)
        if records.ndim != 2:
            raise ValueError("records must be a 2-D array")
        arities = np.array(self.arities, dtype=np.int64, copy=True).reshape(-1)
        names = tuple(str(x) for x in self.names)
        if records.shape[1] != len(names) or arities.shape[0] != len(names):
            raise ValueError(
                f"{len(names)} names, {arities.shape[0]} arities and "
                f"{records.shape[1]} columns do not agree"
            )
        if np.any(arities < 1):
            raise ValueError("arities must be >= 1")
        if records.size:
            if records.min() < 0:
                raise ValueError("records must be nonnegative")
            bad = np.flatnonzero(records.max(axis=0) >= arities)
            if bad.size:
                i = int(bad[0])
                raise ValueError(
                    f"column {i} ({names[i]}) has value {records[:, i].max()} "
                    f"outside arity {arities[i]}"
                )
        records.flags.writeable = False
        arities.flags.writeable = False
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "arities", arities)
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return len(self.names)

    @property
    def m(self):
        return self.records.shape[0]

    @classmethod
    def from_records(cls, records, arities=None, names=None):
        """Build a dataset, inferring each arity as column max + 1 when not given."""
        records = np.asarray(records, dtype=np.int64)
        if records.ndim != 2:
            raise ValueError("records must be a 2-D array")
        n = records.shape[1]
        if arities is None:
            arities = infer_arities(records)
        if names is None:
            names = [f"x{i}" for i in range(n)]
        return cls(names=tuple(names), arities=arities, records=records)

    def head(self, m):
        """Dataset made of the first ``m`` records."""
        return Dataset(self.names, self.arities, self.records[:m])


def infer_arities(records):
    records = np.asarray(records)
    if records.shape[0] == 0:
        return np.ones(records.shape[1], dtype=np.int64)
    return records.max(axis=0).astype(np.int64) + 1


@dataclass(frozen=True)
class PriorSpec:
    """Analysis model: indegree bound, structure-prior families and local score."""

    k: int
    rho: str = "cardinality_uniform"
    q: str = "uniform"
    score: str = "dirichlet_all_ones"
    ess: float = 1.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be nonnegative, got {self.k}")
        if self.rho not in RHO_FAMILIES:
            raise ValueError(f"unknown rho family {self.rho!r}; choose from {RHO_FAMILIES}")
        if self.q not in Q_FAMILIES:
            raise ValueError(f"unknown q family {self.q!r}; choose from {Q_FAMILIES}")
        if self.score not in SCORE_FAMILIES:
            raise ValueError(f"unknown score family {self.score!r}; choose from {SCORE_FAMILIES}")
        if self.score == "bdeu" and not self.ess > 0:
            raise ValueError(f"BDeu needs ess > 0, got {self.ess}")

    def for_nodes(self, n):
        """Copy with ``k`` clamped to ``n - 1``."""
        k = min(self.k, max(n - 1, 0))
        if k == self.k:
            return self
        return PriorSpec(k, self.rho, self.q, self.score, self.ess)

    def as_dict(self):
        out = {"k": self.k, "rho": self.rho, "q": self.q, "score": self.score}
        if self.score == "bdeu":
            out["ess"] = self.ess
        return out


def load_dataset(path, arities=None):
    """Read a comma-separated dataset: a header of names, then integer rows.

    Lines starting with ``#`` and blank lines are skipped. Errors carry the
    1-based line number.
    """
    names = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if names is None:
                if any(c == "" for c in cells):
                    raise DatasetParseError("empty attribute name in header", lineno, path)
                names = cells
                continue
            if len(cells) != len(names):
                raise DatasetParseError(
                    f"expected {len(names)} fields, found {len(cells)}", lineno, path
                )
            row = []
            for c in cells:
                try:
                    v = int(c)
                except ValueError:
                    raise DatasetParseError(f"non-integer cell {c!r}", lineno, path) from None
                if v < 0:
                    raise DatasetParseError(f"negative value {v}", lineno, path)
                row.append(v)
            rows.append(row)
    if names is None:
        raise DatasetParseError("missing header line", None, path)
    records = np.array(rows, dtype=np.int64).reshape(len(rows), len(names))
    inferred = infer_arities(records)
    if arities is None:
        arities = inferred
    else:
        arities = np.asarray(arities, dtype=np.int64)
        if arities.shape != (len(names),):
            raise DatasetParseError(
                f"{arities.size} arities given for {len(names)} attributes", None, path
            )
        bad = np.flatnonzero(inferred > arities)
        if bad.size:
            i = int(bad[0])
            raise DatasetParseError(
                f"column {names[i]} has value {inferred[i] - 1} >= arity {arities[i]}",
                None,
                path,
            )
    return Dataset(tuple(names), arities, records)


def _family_counts(data, i, parents):
    """Nonzero counts ``m_jc`` as a 2-D array (observed configs x r_i), and q."""
    r = int(data.arities[i])
    q = 1
    for u in parents:
        q *= int(data.arities[u])
    if q * r >= _INDEX_LIMIT:
        raise ScoreOverflowError(
            f"family ({i} | {parents}) has {q} parent configurations; "
            "too many to index"
        )
    x = data.records
    config = np.zeros(data.m, dtype=np.int64)
    stride = 1
    for u in parents:
        config += x[:, u] * stride
        stride *= int(data.arities[u])
    key = config * r + x[:, i]
    if q * r <= _DENSE_COUNT_LIMIT:
        counts = np.bincount(key, minlength=q * r).reshape(q, r)
        counts = counts[counts.sum(axis=1) > 0]
    else:
        seen, inverse = np.unique(config, return_inverse=True)
        counts = np.zeros((seen.size, r), dtype=np.int64)
        np.add.at(counts, (inverse.reshape(-1), x[:, i]), 1)
    return counts, q


def local_marginal_likelihood(data, i, parents, score="dirichlet_all_ones", ess=1.0):
    """Log of the parameter-integrated likelihood of column ``i`` given ``parents``.

    ``parents`` is a bitmask or an iterable of column indices. Only observed
    parent configurations contribute, since unobserved ones give a factor 1.
    """
    if isinstance(parents, (int, np.integer)):
        parents = [u for u in range(data.n) if (int(parents) >> u) & 1]
    parents = sorted(int(u) for u in parents)
    if i in parents:
        raise ValueError(f"node {i} cannot be its own parent")
    if data.m == 0:
        return 0.0
    counts, q = _family_counts(data, i, parents)
    r = int(data.arities[i])
    if score == "dirichlet_all_ones":
        a_jc = 1.0
    elif score == "bdeu":
        a_jc = ess / (q * r)
    else:
        raise ValueError(f"unknown score family {score!r}")
    a_j = a_jc * r
    m_j = counts.sum(axis=1)
    per_config = gammaln(a_j) - gammaln(a_j + m_j)
    per_config += np.sum(gammaln(a_jc + counts) - gammaln(a_jc), axis=1)
    # sorted so the result depends only on the multiset of configurations
    return float(np.sum(np.sort(per_config)))


def rho(i, parents, spec, n):
    """Log structure-prior factor for ``parents`` (a bitmask) as the parents of ``i``."""
    size = int(parents).bit_count()
    if size > spec.k:
        return -math.inf
    if spec.rho == "flat":
        return 0.0
    return -math.log(math.comb(n - 1, size))


def q(i, preds, spec):
    """Log order-prior factor for the predecessor set ``preds`` of ``i``."""
    return 0.0


@dataclass(frozen=True, eq=False)
class FamilyScoreTable:
    """Family scores of one node for every admissible parent set.

    ``parents[j]`` is a full-width bitmask and ``scores[j]`` its log score.
    Parent sets appear in ascending (cardinality, mask) order.
    """

    node: int
    parents: np.ndarray
    scores: np.ndarray = field(repr=False)

    def __len__(self):
        return self.parents.shape[0]

    def __getitem__(self, mask):
        hit = np.flatnonzero(self.parents == mask)
        if hit.size == 0:
            raise KeyError(mask)
        return float(self.scores[hit[0]])

    def as_dict(self):
        return {int(g): float(s) for g, s in zip(self.parents, self.scores)}


def compute_beta(data, spec):
    """Family score tables ``rho + local likelihood`` for every node, ``|G| <= k``."""
    n = data.n
    spec = spec.for_nodes(n)
    full = (1 << n) - 1
    log_rho = np.array([rho(0, (1 << size) - 1, spec, n) for size in range(spec.k + 1)])
    tables = []
    for i in range(n):
        parents = subsets_array(full & ~(1 << i), spec.k)
        scores = log_rho[popcount(parents)]
        if data.m:
            scores += [
                local_marginal_likelihood(data, i, int(g), spec.score, spec.ess)
                for g in parents
            ]
        parents.flags.writeable = False
        scores.flags.writeable = False
        tables.append(FamilyScoreTable(i, parents, scores))
    return tables
