"""Conditional expectations by ridge regression on truncated signatures.

E[xi | F_{t_k}] is estimated by regressing the sample targets on the prefix
signature coefficients of the time-augmented driving path up to t_k — one
regression (one coefficient vector) per grid index, shared by all samples.
At k = 0 the sigma-field is trivial and the estimate degenerates to the
sample mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ridge
from .errors import ShapeError
from .signature import SignatureFeatures


@dataclass(frozen=True)
class CeConfig:
    """Estimator knobs: signature truncation depth and ridge penalty."""

    depth: int = 3
    ridge_lambda: float = 0.3
    normalize_time: bool = False

    def __post_init__(self):
        if self.depth < 1:
            raise ShapeError(f"depth must be >= 1, got {self.depth}")
        if self.ridge_lambda < 0:
            raise ShapeError(f"ridge_lambda must be >= 0, got {self.ridge_lambda}")


def conditional_expectation(
    targets: np.ndarray,
    prefix_sigs: SignatureFeatures,
    k: int,
    cfg: CeConfig,
) -> np.ndarray:
    """Per-sample estimate of E[targets | F_{t_k}].

    targets: (M,) or (M, n); returns fitted values of the same shape. The
    estimator is linear in targets.
    """
    targets = np.asarray(targets, dtype=float)
    m = prefix_sigs.array.shape[0]
    if targets.shape[0] != m:
        raise ShapeError(f"{targets.shape[0]} targets for {m} paths")
    if not 0 <= k < prefix_sigs.array.shape[1]:
        raise ShapeError(f"grid index {k} outside 0..{prefix_sigs.array.shape[1] - 1}")
    if k == 0:
        mean = targets.mean(axis=0)
        return np.broadcast_to(mean, targets.shape).copy()
    prepared = ridge.PreparedRidge(prefix_sigs.at_step(k), cfg.ridge_lambda)
    return prepared.regress(targets)
