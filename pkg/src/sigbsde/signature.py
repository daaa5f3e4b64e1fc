"""Signatures of piecewise-linear paths, truncated at a fixed depth.

A discrete path is read as its piecewise-linear interpolation. The signature
of one linear segment with increment v is exp_level1(v); prefix signatures
over a grid follow from the multiplicative (Chen) identity

    Sig[0, t_{k+1}] = Sig[0, t_k] ⊗ Sig[t_k, t_{k+1}].

Paths here are time-augmented before any signature is taken: coordinate 1 is
the clock, coordinate 2 (and up) the state. The batch builder computes one
prefix-signature coefficient block per grid index for every sample at once;
these coefficient vectors are exactly the regression features used downstream
(the empty word sits at index 0 and is identically 1, i.e. the intercept).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensoralg import TruncatedTensor, dimension, exp_level1, level_offset

from .simulate import PathBatch


@dataclass(frozen=True)
class AugmentedPath:
    """One discrete path in R^d whose first coordinate is strictly increasing time."""

    times: np.ndarray  # (N+1,) grid, equal to values[:, 0]
    values: np.ndarray  # (N+1, d)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.times.shape[0]:
            raise ShapeError(
                f"values shape {self.values.shape} incompatible with "
                f"{self.times.shape[0]} grid points"
            )
        if np.any(np.diff(self.values[:, 0]) <= 0):
            raise ShapeError("time coordinate must be strictly increasing")

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AugmentedBatch:
    """M time-augmented paths on a shared grid."""

    times: np.ndarray  # (N+1,)
    values: np.ndarray  # (M, N+1, d)

    def path(self, j: int) -> AugmentedPath:
        return AugmentedPath(self.times, self.values[j])


def augment_time(batch: PathBatch, normalize_time: bool = False) -> AugmentedBatch:
    """Prepend the clock to scalar paths: (t_k, X_k) per grid index.

    normalize_time rescales the clock to [0, 1]; signatures are invariant
    under reparameterization of a *single* coordinate pattern only jointly,
    so this genuinely changes the mixed-word feature scales. Off by default.
    """
    times = batch.grid.times
    clock = times / batch.grid.total_time if normalize_time else times
    m = batch.values.shape[0]
    values = np.empty((m, times.size, 2))
    values[:, :, 0] = clock
    values[:, :, 1] = batch.values
    return AugmentedBatch(times, values)


def segment_signature(p: np.ndarray, q: np.ndarray, depth: int) -> TruncatedTensor:
    """Signature of the straight segment from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError(f"endpoint shapes differ: {p.shape} vs {q.shape}")
    return exp_level1(q - p, depth)


class PrefixSignatures:
    """Signatures Sig[0, t_k] of one path, for every grid index k."""

    def __init__(self, path: AugmentedPath, depth: int):
        self.d = path.d
        self.depth = depth
        self._features = _batch_prefix_features(path.values[None, :, :], depth)[0]

    def entry(self, k: int) -> TruncatedTensor:
        return TruncatedTensor(self.d, self.depth, self._features[k].copy())

    def features(self) -> np.ndarray:
        """(N+1, dim) array of signature coefficients."""
        return self._features


def prefix_signatures(path: AugmentedPath, depth: int) -> PrefixSignatures:
    """Chen accumulation of segment signatures along the grid."""
    return PrefixSignatures(path, depth)


def feature_vector(sig: TruncatedTensor) -> np.ndarray:
    """Flat coefficients in canonical order; entry 0 is the constant 1."""
    return sig.coeffs.copy()


class SignatureFeatures:
    """Prefix-signature feature cache for a batch: (M, N+1, dim) coefficients.

    Built once per solve and shared by every regression; row layout matches
    feature_vector, so column 0 is the intercept.
    """

    def __init__(self, batch: AugmentedBatch, depth: int):
        self.d = batch.values.shape[2]
        self.depth = depth
        self.times = batch.times
        self.array = _batch_prefix_features(batch.values, depth)

    @property
    def n_features(self) -> int:
        return self.array.shape[2]

    def at_step(self, k: int) -> np.ndarray:
        """(M, dim) design matrix at grid index k."""
        return self.array[:, k, :]


def _batch_prefix_features(values: np.ndarray, depth: int) -> np.ndarray:
    """Prefix signatures of M piecewise-linear paths, vectorized over samples.

    values: (M, N+1, d). Returns (M, N+1, dim(d, depth)). Works level-by-level:
    the level-n block of a canonical flat vector is the row-major n-fold tensor
    power, so both the segment exponential and the Chen product reduce to
    batched outer products between level blocks.
    """
    if values.ndim != 3:
        raise ShapeError(f"expected (M, N+1, d) array, got shape {values.shape}")
    m, n_points, d = values.shape
    dim = dimension(d, depth)
    offsets = [level_offset(d, n) for n in range(depth + 1)] + [dim]

    out = np.zeros((m, n_points, dim))
    out[:, :, 0] = 1.0

    # current prefix signature, one array per level (level 0 is implicitly 1)
    cur: list[np.ndarray] = [np.ones((m, 1))]
    cur += [np.zeros((m, d**n)) for n in range(1, depth + 1)]

    for k in range(n_points - 1):
        inc = values[:, k + 1, :] - values[:, k, :]
        # segment signature levels: inc^{⊗n} / n!
        seg: list[np.ndarray] = [np.ones((m, 1)), inc]
        for n in range(2, depth + 1):
            seg.append(
                np.einsum("mp,mq->mpq", seg[-1], inc).reshape(m, -1) / n
            )
        nxt = [np.ones((m, 1))]
        for n in range(1, depth + 1):
            acc = cur[n] + seg[n]
            for i in range(1, n):
                acc = acc + np.einsum(
                    "mp,mq->mpq", cur[i], seg[n - i]
                ).reshape(m, -1)
            nxt.append(acc)
        cur = nxt
        for n in range(1, depth + 1):
            out[:, k + 1, offsets[n] : offsets[n + 1]] = cur[n]
    return out
