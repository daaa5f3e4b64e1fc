"""Forward simulation: Brownian batches and Euler-type SDE schemes.

All randomness flows through a counter-based Philox generator keyed by the
caller's seed, so batches are bit-reproducible and independent of how many
samples are drawn before or after.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from .errors import ShapeError, SimulationError


@dataclass(frozen=True)
class TimeGrid:
    """Equidistant grid 0 = t_0 < ... < t_N = T."""

    total_time: float
    n_steps: int

    def __post_init__(self):
        if self.total_time <= 0 or self.n_steps < 1:
            raise ShapeError(
                f"need total_time > 0 and n_steps >= 1, got "
                f"({self.total_time}, {self.n_steps})"
            )

    @property
    def dt(self) -> float:
        return self.total_time / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.total_time, self.n_steps + 1)


@dataclass(frozen=True)
class PathBatch:
    """M sample paths on a shared grid.

    values[:, k+1] - values[:, k] == increments[:, k] by construction.
    """

    grid: TimeGrid
    values: np.ndarray  # (M, N+1)
    increments: np.ndarray  # (M, N)
    seed: int

    def __post_init__(self):
        m, n_plus_1 = self.values.shape
        if self.increments.shape != (m, n_plus_1 - 1):
            raise ShapeError(
                f"increments shape {self.increments.shape} incompatible "
                f"with values shape {self.values.shape}"
            )
        if n_plus_1 != self.grid.n_steps + 1:
            raise ShapeError(
                f"values have {n_plus_1} grid points, grid has {self.grid.n_steps + 1}"
            )

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample_brownian(n_samples: int, grid: TimeGrid, seed: int) -> PathBatch:
    """Standard Brownian batch started at 0; increments are N(0, dt) iid."""
    if n_samples < 1:
        raise ShapeError(f"need n_samples >= 1, got {n_samples}")
    rng = _rng(seed)
    increments = rng.standard_normal((n_samples, grid.n_steps)) * np.sqrt(grid.dt)
    values = np.empty((n_samples, grid.n_steps + 1))
    values[:, 0] = 0.0
    np.cumsum(increments, axis=1, out=values[:, 1:])
    return PathBatch(grid, values, increments, seed)


def _finite_or_raise(state: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(state)):
        bad = int(np.count_nonzero(~np.isfinite(state)))
        raise SimulationError(
            f"non-finite state at step {step} ({bad} samples)"
        )


def euler_maruyama(
    drift: Callable[[float, np.ndarray], np.ndarray],
    diffusion: Callable[[float, np.ndarray], np.ndarray],
    x0: float,
    driving: PathBatch,
) -> PathBatch:
    """Explicit Euler scheme X_{k+1} = X_k + b(t_k, X_k) dt + s(t_k, X_k) dB_{k+1}.

    drift and diffusion map (t, state vector) to per-sample values; the
    driving batch supplies grid and Brownian increments.
    """
    grid = driving.grid
    dt = grid.dt
    times = grid.times
    m = driving.n_samples
    values = np.empty((m, grid.n_steps + 1))
    values[:, 0] = x0
    for k in range(grid.n_steps):
        x = values[:, k]
        values[:, k + 1] = (
            x + drift(times[k], x) * dt + diffusion(times[k], x) * driving.increments[:, k]
        )
        _finite_or_raise(values[:, k + 1], k + 1)
    return PathBatch(grid, values, np.diff(values, axis=1), driving.seed)


def cir_full_truncation(
    a: float, b: float, sigma: float, x0: float, driving: PathBatch
) -> PathBatch:
    """Square-root diffusion dX = a(b - X)dt + sigma sqrt(X) dB, full truncation.

    The negative part is clipped inside both the drift and the square root, so
    iterates may dip below zero but the scheme never takes sqrt of a negative.
    """
    if a < 0 or b < 0 or sigma < 0 or x0 < 0:
        raise ShapeError(
            f"CIR parameters must be nonnegative, got a={a}, b={b}, sigma={sigma}, x0={x0}"
        )
    grid = driving.grid
    dt = grid.dt
    m = driving.n_samples
    values = np.empty((m, grid.n_steps + 1))
    values[:, 0] = x0
    for k in range(grid.n_steps):
        x = values[:, k]
        xp = np.maximum(x, 0.0)
        values[:, k + 1] = x + a * (b - xp) * dt + sigma * np.sqrt(xp) * driving.increments[:, k]
        _finite_or_raise(values[:, k + 1], k + 1)
    return PathBatch(grid, values, np.diff(values, axis=1), driving.seed)


def dump_paths_csv(batch: PathBatch, out: TextIO, n_samples: int | None = None) -> None:
    """Write `sample,k,t,value` rows, header included, '.' decimal."""
    m = batch.n_samples if n_samples is None else min(n_samples, batch.n_samples)
    times = batch.grid.times
    out.write("sample,k,t,value\n")
    for j in range(m):
        for k in range(times.size):
            out.write(f"{j},{k},{times[k]:.17g},{batch.values[j, k]:.17g}\n")
