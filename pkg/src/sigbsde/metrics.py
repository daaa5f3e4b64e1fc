"""Path-space error metric for solver output against a reference."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def erl2(approx: np.ndarray, exact: np.ndarray, dt: float) -> float:
    """Monte Carlo L^2([0,T]) error between two path batches.

    sqrt( (1/M) sum_j sum_k |approx_jk - exact_jk|^2 dt ), summed over every
    grid column present in the arrays (use Y on 0..N, Z on 0..N-1).
    """
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape or approx.ndim != 2:
        raise ShapeError(
            f"need matching 2-d arrays, got {approx.shape} vs {exact.shape}"
        )
    if dt <= 0:
        raise ShapeError(f"dt must be > 0, got {dt}")
    return float(np.sqrt(np.mean(np.sum(np.square(approx - exact), axis=1)) * dt))
