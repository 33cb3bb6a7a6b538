"""Reading and writing datasets, posterior matrices and networks."""
import csv
import json

import numpy as np

from .model import PriorSpec
from .results import EdgePosteriors
from .study import GroundTruthNetwork


def _fmt(x):
    return format(float(x), ".17g")


def write_dataset(data, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(data.names)
    writer.writerows(data.records.tolist())


def write_posteriors_csv(post, fh):
    """``n`` lines of ``n`` comma-separated probabilities, 17 significant digits."""
    for row in post.matrix:
        fh.write(",".join(_fmt(x) for x in row) + "\n")


def posteriors_to_dict(post, timings=True):
    spec = post.spec
    return {
        "n": post.n,
        "names": list(post.names),
        "k": spec.k if spec else None,
        "prior": {"rho": spec.rho, "q": spec.q} if spec else None,
        "score": ({"family": spec.score, "ess": spec.ess} if spec else None),
        "log_marginal": post.log_marginal,
        "posteriors": [float(x) for x in post.matrix.ravel()],
        "elapsed_ms": post.elapsed_ms if timings else None,
        "seed_info": post.seed_info or None,
    }


def write_posteriors_json(post, fh, timings=True):
    json.dump(posteriors_to_dict(post, timings), fh, indent=1)
    fh.write("\n")


def read_posteriors_json(fh):
    d = json.load(fh)
    n = int(d["n"])
    matrix = np.asarray(d["posteriors"], dtype=np.float64).reshape(n, n)
    spec = None
    if d.get("k") is not None and d.get("prior"):
        score = d.get("score") or {}
        spec = PriorSpec(
            int(d["k"]),
            rho=d["prior"]["rho"],
            q=d["prior"]["q"],
            score=score.get("family", "dirichlet_all_ones"),
            ess=score.get("ess", 1.0),
        )
    return EdgePosteriors(
        matrix=matrix,
        log_marginal=d.get("log_marginal"),
        names=tuple(d.get("names") or ()),
        spec=spec,
        elapsed_ms=d.get("elapsed_ms"),
        seed_info=d.get("seed_info") or {},
    )


def write_network_json(net, fh):
    json.dump(net.to_dict(), fh, indent=1)
    fh.write("\n")


def read_network_json(fh):
    return GroundTruthNetwork.from_dict(json.load(fh))
