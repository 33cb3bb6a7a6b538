from dataclasses import dataclass, field

import numpy as np

from .model import PriorSpec


@dataclass
class EdgePosteriors:
    """Matrix of directed edge posteriors; ``matrix[u, v]`` is P(u -> v | data)."""

    matrix: np.ndarray
    log_marginal: float
    names: tuple = ()
    spec: PriorSpec = None
    elapsed_ms: float = None
    seed_info: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.matrix.shape[0]

    def undirected(self):
        """Symmetric matrix of ``P(u -> v) + P(v -> u)``."""
        return self.matrix + self.matrix.T
