"""scikit-learn compatible front end to the exact edge-posterior engine."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import edge_posteriors
from .model import Dataset, PriorSpec, infer_arities


def check_records(X, arities=None):
    """Validate an ``(m, n)`` matrix of category indices.

    Accepts any array-like (including a DataFrame) holding nonnegative
    integers; integral floats are accepted and cast. Returns
    ``(records, arities, names)``; ``names`` is ``None`` unless ``X`` has
    string column names.
    """
    names = None
    if hasattr(X, "columns") and all(isinstance(c, str) for c in X.columns):
        names = list(X.columns)
    records = check_array(X, dtype=None, ensure_min_samples=0)
    if not np.issubdtype(records.dtype, np.integer):
        as_float = records.astype(np.float64)
        if not np.all(np.isfinite(as_float)) or np.any(as_float != np.round(as_float)):
            raise ValueError("records must be integer category indices")
        records = as_float
    records = records.astype(np.int64)
    if records.size and records.min() < 0:
        raise ValueError("records must be nonnegative")
    inferred = infer_arities(records)
    if arities is None:
        arities = inferred
    else:
        arities = np.asarray(arities, dtype=np.int64)
        if arities.shape != (records.shape[1],):
            raise ValueError(
                f"got {arities.size} arities for {records.shape[1]} columns"
            )
        if np.any(inferred > arities):
            raise ValueError("a column holds a value at or above its declared arity")
    return records, arities, names


class EdgePosteriorEstimator(BaseEstimator):
    """Exact posterior probability of every directed edge.

    Parameters
    ----------
    max_indegree : int, default=3
        Largest parent set considered; clamped to ``n_features - 1``.
    rho : {"cardinality_uniform", "flat"}
        Structure prior over parent sets.
    score : {"dirichlet_all_ones", "bdeu"}
        Local marginal likelihood.
    ess : float, default=1.0
        Equivalent sample size, used only by BDeu.
    arities : array-like of int, optional
        Number of states per column. Inferred as ``max + 1`` when omitted.
    allow_large : bool, default=False
        Raise the node cap from 24 to 26.

    Attributes
    ----------
    posteriors_ : ndarray of shape (n_features, n_features)
        ``posteriors_[u, v]`` is the posterior probability of the edge u -> v.
    log_marginal_ : float
        Log marginal likelihood of the data, up to the prior's constants.
    arities_ : ndarray of shape (n_features,)
    n_features_in_ : int
    feature_names_in_ : ndarray of str
        Only when ``X`` had string column names.
    elapsed_ms_ : float
    """

    def __init__(
        self,
        max_indegree=3,
        rho="cardinality_uniform",
        score="dirichlet_all_ones",
        ess=1.0,
        arities=None,
        allow_large=False,
    ):
        self.max_indegree = max_indegree
        self.rho = rho
        self.score = score
        self.ess = ess
        self.arities = arities
        self.allow_large = allow_large

    def _prior(self):
        return PriorSpec(int(self.max_indegree), rho=self.rho, score=self.score, ess=self.ess)

    def fit(self, X, y=None):
        spec = self._prior()
        records, arities, names = check_records(X, self.arities)
        data = Dataset.from_records(records, arities=arities, names=names)
        result = edge_posteriors(data, spec, allow_large=self.allow_large)
        self.result_ = result
        self.posteriors_ = result.matrix
        self.log_marginal_ = result.log_marginal
        self.arities_ = np.asarray(data.arities)
        self.n_features_in_ = data.n
        if names is not None:
            self.feature_names_in_ = np.asarray(names, dtype=object)
        self.elapsed_ms_ = result.elapsed_ms
        return self

    def undirected_scores(self):
        """``P(u -> v) + P(v -> u)`` as a symmetric matrix."""
        check_is_fitted(self, "posteriors_")
        return self.posteriors_ + self.posteriors_.T

    def predict_edges(self, threshold=0.5):
        """Boolean matrix of directed edges whose posterior exceeds ``threshold``."""
        check_is_fitted(self, "posteriors_")
        return self.posteriors_ > threshold
