"""Figure rendering for run reports. Files only, no interactive backends."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .solver import BsdeSolution


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def error_histogram(errors: np.ndarray, label: str, path: Path) -> None:
    """Histogram of per-iteration path errors."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(errors, bins=min(20, max(5, errors.size // 3)), color="tab:blue", alpha=0.8)
    ax.axvline(errors.mean(), color="tab:red", linestyle="--",
               label=f"mean {errors.mean():.4f}")
    ax.set_xlabel("ERL2")
    ax.set_ylabel("count")
    ax.set_title(f"{label}: error over iterations")
    ax.legend()
    _save(fig, path)


def solution_plot(
    solution: BsdeSolution, exact_y: np.ndarray | None, path: Path, sample: int = 0
) -> None:
    """One trajectory of the numerical solution, with the reference if known."""
    times = solution.grid.times
    n_panels = 2
    fig, axes = plt.subplots(1, n_panels, figsize=(10, 4))
    axes[0].plot(times, solution.y[sample], label="numerical Y", lw=1.0)
    if exact_y is not None:
        axes[0].plot(times, exact_y[sample], label="exact Y", lw=1.0, linestyle="--")
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("Y")
    axes[0].legend()
    axes[1].plot(times[:-1], solution.z[sample], label="numerical Z", lw=0.8,
                 color="tab:green")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("Z")
    axes[1].legend()
    fig.suptitle(f"sample {sample}")
    _save(fig, path)


def scaling_plot(sample_sizes, means, slope: float, path: Path) -> None:
    """Log-log mean error against sample count with the fitted slope."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(sample_sizes, means, "o-", label=f"slope {slope:.3f}")
    ax.set_xlabel("samples M")
    ax.set_ylabel("mean ERL2")
    ax.legend()
    _save(fig, path)


def loss_plot(losses: np.ndarray, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(losses, lw=0.8)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("training loss")
    _save(fig, path)


def rate_plot(y_grid, learned, analytic, path: Path) -> None:
    """Learned worst-case rate against the indicator rule."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(y_grid, learned, label="network rate", lw=1.2)
    ax.plot(y_grid, analytic, label="indicator rule", lw=1.2, linestyle="--")
    ax.set_xlabel("y")
    ax.set_ylabel("rate")
    ax.legend()
    _save(fig, path)


def rho_compare_plot(times, mean_rho, references: dict[float, np.ndarray], path: Path) -> None:
    """Mean learned risk path against constant-rate reference means."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(times, mean_rho, label="learned rate", lw=1.5)
    for beta, ref in sorted(references.items()):
        ax.plot(times, ref, label=f"constant rate {beta:g}", lw=1.0, linestyle="--")
    ax.set_xlabel("t")
    ax.set_ylabel("mean rho_t")
    ax.legend()
    _save(fig, path)
