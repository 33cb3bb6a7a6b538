"""Synthetic-network experiments: random networks, forward sampling, ROC curves."""
import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import edge_posteriors
from .exceptions import DimensionMismatchError
from .model import Dataset, PriorSpec

REPORT_FIELDS = ("n", "k", "r", "replicate", "seed", "m", "auc", "n_true_edges", "elapsed_ms")


def derive_seed(*keys):
    """Deterministic 32-bit seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence([int(x) for x in keys]).generate_state(1)[0])


@dataclass(eq=False)
class GroundTruthNetwork:
    """A discrete network with common arity ``r``.

    ``parents[i]`` is a sorted tuple. ``cpts[i]`` has one row per parent
    configuration; configuration ``j`` encodes parent states in mixed radix
    with the lowest-indexed parent as the least significant digit.
    """

    n: int
    k: int
    r: int
    order: tuple
    parents: tuple
    cpts: tuple
    seed: int = None

    def edges(self):
        return {(u, v) for v in range(self.n) for u in self.parents[v]}

    def undirected_truth(self):
        """Boolean ``n x n`` matrix, true where ``u`` and ``v`` are adjacent."""
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            adj[u, v] = adj[v, u] = True
        return adj

    def validate(self):
        position = {node: pos for pos, node in enumerate(self.order)}
        if sorted(self.order) != list(range(self.n)):
            raise ValueError("order is not a permutation")
        for i in range(self.n):
            ps = self.parents[i]
            if len(ps) > self.k:
                raise ValueError(f"node {i} has {len(ps)} > k parents")
            if any(position[u] >= position[i] for u in ps):
                raise ValueError(f"node {i} has a parent that does not precede it")
            cpt = np.asarray(self.cpts[i])
            if cpt.shape != (self.r ** len(ps), self.r):
                raise ValueError(f"CPT of node {i} has shape {cpt.shape}")
            if np.any(np.abs(cpt.sum(axis=1) - 1.0) > 1e-12) or np.any(cpt < 0):
                raise ValueError(f"CPT of node {i} has a row that is not a distribution")

    def to_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "seed": self.seed,
            "order": list(self.order),
            "parents": [list(p) for p in self.parents],
            "cpts": [np.asarray(c).tolist() for c in self.cpts],
        }

    @classmethod
    def from_dict(cls, d):
        net = cls(
            n=int(d["n"]),
            k=int(d["k"]),
            r=int(d["r"]),
            order=tuple(int(x) for x in d["order"]),
            parents=tuple(tuple(sorted(int(u) for u in p)) for p in d["parents"]),
            cpts=tuple(np.asarray(c, dtype=np.float64) for c in d["cpts"]),
            seed=d.get("seed"),
        )
        net.validate()
        return net


def generate_network(n, k, r, seed):
    """Random network with a uniform order, uniform parent counts and flat Dirichlet CPTs.

    A node with fewer predecessors than its drawn parent count redraws the
    count uniformly from ``0..min(k, #predecessors)``.
    """
    if n < 1 or not 0 <= k <= n - 1 or r < 2:
        raise ValueError(f"invalid network dimensions n={n}, k={k}, r={r}")
    rng = np.random.default_rng(seed)
    order = tuple(int(x) for x in rng.permutation(n))
    position = {node: pos for pos, node in enumerate(order)}
    parents = []
    cpts = []
    for i in range(n):
        preds = sorted(order[: position[i]])
        count = int(rng.integers(0, k + 1))
        if count > len(preds):
            count = int(rng.integers(0, min(k, len(preds)) + 1))
        chosen = rng.choice(len(preds), size=count, replace=False) if count else []
        ps = tuple(sorted(preds[j] for j in chosen))
        rows = rng.standard_exponential((r ** len(ps), r))
        rows /= rows.sum(axis=1, keepdims=True)
        parents.append(ps)
        cpts.append(rows)
    return GroundTruthNetwork(n, k, r, order, tuple(parents), tuple(cpts), seed)


def sample_data(net, m, seed):
    """Draw ``m`` records by ancestral sampling along ``net.order``."""
    rng = np.random.default_rng(seed)
    x = np.zeros((m, net.n), dtype=np.int64)
    for i in net.order:
        config = np.zeros(m, dtype=np.int64)
        stride = 1
        for u in net.parents[i]:
            config += x[:, u] * stride
            stride *= net.r
        cum = np.cumsum(net.cpts[i], axis=1)[config]
        u01 = rng.random(m)
        x[:, i] = np.minimum((u01[:, None] >= cum[:, :-1]).sum(axis=1), net.r - 1)
    names = [f"x{i}" for i in range(net.n)]
    return Dataset(tuple(names), [net.r] * net.n, x)


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_from_scores(scores, labels):
    """Exact ROC of "claim positive iff score > threshold".

    Thresholds run over ``+inf``, the distinct scores in decreasing order,
    and ``-inf``. AUC is the trapezoidal area. It is ``nan`` when either
    class is empty.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise DimensionMismatchError("scores and labels differ in length")
    thresholds = np.concatenate(([math.inf], np.unique(scores)[::-1], [-math.inf]))
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    claimed = scores[None, :] > thresholds[:, None]
    tp = (claimed & labels).sum(axis=1)
    fp = (claimed & ~labels).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        tpr = tp / n_pos if n_pos else np.full(tp.shape, math.nan)
        fpr = fp / n_neg if n_neg else np.full(fp.shape, math.nan)
    if n_pos and n_neg:
        auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    else:
        auc = math.nan
    return RocCurve(fpr, tpr, thresholds, auc)


def pair_scores(truth, matrix):
    """Undirected scores and labels over pairs ``u < v``, in row-major pair order."""
    n = truth.n
    matrix = np.asarray(matrix)
    if matrix.shape != (n, n):
        raise DimensionMismatchError(
            f"posterior matrix is {matrix.shape[0]}x{matrix.shape[1]}, network has n={n}"
        )
    iu, iv = np.triu_indices(n, k=1)
    scores = matrix[iu, iv] + matrix[iv, iu]
    labels = truth.undirected_truth()[iu, iv]
    return scores, labels


def roc(truth, post):
    """ROC of undirected edge recovery from directed edge posteriors."""
    matrix = post.matrix if hasattr(post, "matrix") else post
    return roc_from_scores(*pair_scores(truth, matrix))


def write_roc_csv(curve, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["fpr", "tpr", "threshold"])
    for f, t, th in zip(curve.fpr, curve.tpr, curve.thresholds):
        writer.writerow([_fmt(f), _fmt(t), _fmt(th)])


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class StudyConfig:
    """Grid of network dimensions, nested sample sizes and replicates."""

    ns: tuple = (5,)
    ks: tuple = (2,)
    rs: tuple = (2,)
    ms: tuple = (20, 100, 500, 2000)
    replicates: int = 10
    seed: int = 0
    timings: bool = True

    def points(self):
        for n in self.ns:
            for k in self.ks:
                if k > n - 1:
                    continue
                for r in self.rs:
                    yield n, k, r


def _replicate_rows(config, n, k, r, rep, curve_dir, noise_seed):
    rows = []
    seed = derive_seed(config.seed, n, k, r, rep)
    net = generate_network(n, k, r, seed)
    data = sample_data(net, max(config.ms), derive_seed(seed, 1))
    for m in sorted(config.ms):
        start = time.perf_counter()
        if noise_seed is None:
            post = edge_posteriors(data.head(m), PriorSpec(k)).matrix
        else:
            noise = np.random.default_rng(derive_seed(noise_seed, seed, m))
            post = noise.random((n, n))
            np.fill_diagonal(post, 0.0)
        curve = roc(net, post)
        elapsed = (time.perf_counter() - start) * 1000.0
        rows.append(
            {
                "n": n,
                "k": k,
                "r": r,
                "replicate": rep,
                "seed": seed,
                "m": m,
                "auc": curve.auc,
                "n_true_edges": len(net.edges()),
                "elapsed_ms": round(elapsed, 3) if config.timings else 0,
            }
        )
        if curve_dir is not None:
            path = os.path.join(curve_dir, f"roc_n{n}_k{k}_r{r}_rep{rep}_m{m}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                write_roc_csv(curve, fh)
    return rows


def run_study(config, curve_dir=None, noise_seed=None, threads=1):
    """Run every replicate of every grid point and return report rows.

    Each replicate draws one network and one dataset of ``max(ms)`` records;
    smaller sample sizes use prefixes of it. If ``curve_dir`` is given, one
    ``roc_n{n}_k{k}_r{r}_rep{i}_m{m}.csv`` per row is written there. With
    ``noise_seed`` set, posteriors are replaced by seeded uniform noise
    (a null baseline). Replicates run on ``threads`` workers; row order does
    not depend on the worker count.
    """
    jobs = [
        (config, n, k, r, rep, curve_dir, noise_seed)
        for n, k, r in config.points()
        for rep in range(config.replicates)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda job: _replicate_rows(*job), jobs))
    else:
        chunks = [_replicate_rows(*job) for job in jobs]
    return [row for chunk in chunks for row in chunk]


def write_report(rows, fh):
    writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        out["auc"] = _fmt(row["auc"])
        writer.writerow(out)


def report_text(rows):
    buf = io.StringIO()
    write_report(rows, buf)
    return buf.getvalue()
