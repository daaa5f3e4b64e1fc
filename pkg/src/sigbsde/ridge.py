"""Ridge regression on explicit feature matrices via the normal equations.

Convention used throughout the package: column 0 of the feature matrix is the
intercept column (identically 1). The penalty matrix is the identity with that
diagonal entry zeroed, so the intercept is never shrunk — which also makes
fitted values preserve the sample mean of the targets exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RidgeError, ShapeError

_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class RidgeModel:
    """Fitted weights; fallback records a rank-deficiency rescue at lam = 0."""

    weights: np.ndarray  # (F,) or (F, n_targets)
    lam: float
    fallback: bool = False


class PreparedRidge:
    """Feature matrix with its Gram factorization, reusable across targets.

    The backward solver regresses two target vectors per time step on the same
    design; preparing once avoids recomputing A^T A.
    """

    def __init__(self, features: np.ndarray, lam: float):
        if features.ndim != 2:
            raise ShapeError(f"feature matrix must be 2-d, got shape {features.shape}")
        if lam < 0:
            raise ShapeError(f"ridge penalty must be >= 0, got {lam}")
        self.features = features
        self.lam = lam
        gram = features.T @ features
        penalty = np.eye(features.shape[1])
        penalty[0, 0] = 0.0
        self._penalty = penalty
        self._regularized = gram + lam * penalty
        self.fallback = False
        try:
            self._cho = scipy.linalg.cho_factor(self._regularized)
        except np.linalg.LinAlgError:
            # rank-deficient design (signature features carry exact
            # collinearities at lam = 0); the normal equations square the
            # conditioning, so solve the equivalent augmented least-squares
            # problem min ||A w - y||^2 + lam ||sqrt(P) w||^2 on A itself
            self.fallback = True
            self._cho = None
            root = np.sqrt(lam) * penalty if lam > 0 else penalty[:0]
            self._augmented = np.vstack([features, root])

    def solve(self, targets: np.ndarray) -> RidgeModel:
        if self._cho is not None:
            rhs = self.features.T @ targets
            # check_finite off: non-finite targets must flow through to the
            # caller's own diagnostics instead of a bare scipy ValueError
            weights = scipy.linalg.cho_solve(self._cho, rhs, check_finite=False)
            residual = np.linalg.norm(self._regularized @ weights - rhs)
            scale = max(np.linalg.norm(rhs), np.linalg.norm(self._regularized), 1.0)
            if residual > _RESIDUAL_TOL * scale:
                raise RidgeError(
                    f"normal equations residual {residual:.3e} exceeds "
                    f"{_RESIDUAL_TOL:.0e} relative to scale {scale:.3e}"
                )
        else:
            pad_shape = (self._augmented.shape[0] - targets.shape[0],) + targets.shape[1:]
            padded = np.concatenate([targets, np.zeros(pad_shape)])
            weights = np.linalg.lstsq(self._augmented, padded, rcond=None)[0]
        return RidgeModel(weights, self.lam, self.fallback)

    def regress(self, targets: np.ndarray) -> np.ndarray:
        """Fitted values for targets regressed on the prepared design."""
        return self.features @ self.solve(targets).weights


def fit(features: np.ndarray, targets: np.ndarray, lam: float) -> RidgeModel:
    """Solve (A^T A + lam P) w = A^T y with the intercept unpenalized.

    targets may be (M,) or (M, n_targets); weights match. A singular system
    (rank-deficient design at lam = 0) falls back to a least-squares solve on
    the feature matrix itself — fitted values are then the exact projection
    onto the column span — and the model is flagged.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.shape[0] != features.shape[0]:
        raise ShapeError(
            f"{targets.shape[0]} targets for {features.shape[0]} feature rows"
        )
    return PreparedRidge(features, lam).solve(targets)


def predict(model: RidgeModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.shape[1] != model.weights.shape[0]:
        raise ShapeError(
            f"feature matrix has {features.shape[1]} columns, "
            f"model expects {model.weights.shape[0]}"
        )
    return features @ model.weights
