"""Repeated-solve experiments: error reports, sample-size scaling, artifacts.

A run solves one benchmark `iterations` times with per-iteration sub-seeds
derived from the master seed, collects the path-space errors, and writes a
delimited report plus the first-iteration solution dump under
`<out>/<benchmark>/`.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .benchmarks import Benchmark, make_benchmark
from .conditional import CeConfig
from .errors import ShapeError
from .metrics import erl2
from .simulate import TimeGrid, sample_brownian
from .solver import BsdeSolution, dump_csv, solve_explicit, solve_implicit


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings of one experiment run."""

    benchmark: str = "entropic"
    samples: int = 2**13
    steps: int = 500
    total_time: float = 1.0
    depth: int = 3
    ridge_lambda: float = 0.3
    iterations: int = 50
    seed: int = 7
    scheme: str = "explicit"
    normalize_time: bool = False
    z_winsor: float = 0.01
    out: str = "results"
    figures: bool = True
    paths_samples: int = 32
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in ("explicit", "implicit"):
            raise ShapeError(f"scheme must be explicit or implicit, got {self.scheme!r}")
        if self.iterations < 1 or self.samples < 2:
            raise ShapeError("need iterations >= 1 and samples >= 2")
        if not 0.0 <= self.z_winsor < 0.5:
            raise ShapeError(f"z_winsor must lie in [0, 0.5), got {self.z_winsor}")

    def ce_config(self) -> CeConfig:
        return CeConfig(self.depth, self.ridge_lambda, self.normalize_time)

    def grid(self) -> TimeGrid:
        return TimeGrid(self.total_time, self.steps)


def iteration_seed(seed: int, iteration: int) -> int:
    """Derived sub-seed: deterministic, well mixed across iterations."""
    return int(np.random.SeedSequence([seed, iteration]).generate_state(1)[0])


@dataclass(frozen=True)
class ErrorReport:
    """Per-iteration ERL2 errors of one experiment."""

    benchmark: str
    erl2_y: np.ndarray | None  # None when the benchmark has no exact solution
    erl2_z: np.ndarray | None
    runtimes: np.ndarray
    first_solution: BsdeSolution
    first_exact_y: np.ndarray | None

    @property
    def mean_y(self) -> float:
        return float(self.erl2_y.mean()) if self.erl2_y is not None else float("nan")

    @property
    def std_y(self) -> float:
        if self.erl2_y is None or self.erl2_y.size < 2:
            return float("nan")
        return float(self.erl2_y.std(ddof=1))


def solve_benchmark(
    bench: Benchmark, cfg: ExperimentConfig, seed: int
) -> tuple[BsdeSolution, np.ndarray | None, np.ndarray | None]:
    """One solve; returns (solution, exact Y paths or None, exact Z paths or None)."""
    brownian = sample_brownian(cfg.samples, cfg.grid(), seed)
    forward = bench.forward(brownian)
    terminal = bench.terminal(forward.values[:, -1], cfg.total_time)
    if cfg.scheme == "explicit":
        solution = solve_explicit(
            terminal, bench.driver, forward, brownian, cfg.ce_config(),
            z_winsor=cfg.z_winsor,
        )
    else:
        solution = solve_implicit(
            terminal, bench.driver, forward, brownian, cfg.ce_config(),
            z_winsor=cfg.z_winsor,
        )
    return solution, bench.exact_y_paths(forward), bench.exact_z_paths(forward)


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    """Solve the configured benchmark cfg.iterations times and collect errors."""
    bench = make_benchmark(cfg.benchmark, **cfg.params)
    dt = cfg.grid().dt
    has_exact = bench.exact_y is not None
    errors_y = np.empty(cfg.iterations) if has_exact else None
    errors_z = np.empty(cfg.iterations) if bench.exact_z is not None else None
    runtimes = np.empty(cfg.iterations)
    first_solution = None
    first_exact = None
    for i in range(cfg.iterations):
        start = time.perf_counter()
        solution, exact_y, exact_z = solve_benchmark(bench, cfg, iteration_seed(cfg.seed, i))
        runtimes[i] = time.perf_counter() - start
        if errors_y is not None:
            errors_y[i] = erl2(solution.y, exact_y, dt)
        if errors_z is not None:
            errors_z[i] = erl2(solution.z, exact_z, dt)
        if i == 0:
            first_solution = solution
            first_exact = exact_y
    return ErrorReport(cfg.benchmark, errors_y, errors_z, runtimes, first_solution, first_exact)


@dataclass(frozen=True)
class ScalingResult:
    """Mean error per sample size and the fitted log-log slope."""

    sample_sizes: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    slope: float
    degenerate: bool = False


def scaling_study(cfg: ExperimentConfig, sample_sizes) -> ScalingResult:
    """Repeat the experiment across sample sizes and fit log(err) ~ log(M).

    A single sample size, or an exact-zero mean error, makes the slope
    undefined; the result is then flagged degenerate with slope nan.
    """
    sizes = np.array(sorted(int(m) for m in sample_sizes))
    if sizes.size < 1 or np.any(sizes < 2):
        raise ShapeError(f"bad sample sizes {sizes}")
    means = np.empty(sizes.size)
    stds = np.empty(sizes.size)
    for i, m in enumerate(sizes):
        report = run_experiment(dataclasses.replace(cfg, samples=int(m), figures=False))
        if report.erl2_y is None:
            raise ShapeError(
                f"benchmark {cfg.benchmark!r} has no exact solution; "
                "scaling needs a reference"
            )
        means[i] = report.mean_y
        stds[i] = report.std_y
    if sizes.size < 2 or np.any(means <= 0.0):
        return ScalingResult(sizes, means, stds, float("nan"), degenerate=True)
    slope = float(np.polyfit(np.log(sizes), np.log(means), 1)[0])
    return ScalingResult(sizes, means, stds, slope)


# ---------------------------------------------------------------------------
# artifacts


def _fmt(value) -> str:
    return f"{value:.17g}" if isinstance(value, float) else str(value)


def write_config_txt(cfg: ExperimentConfig, path: Path) -> None:
    """Flat `key = value` echo of the resolved configuration."""
    fields = dataclasses.asdict(cfg)
    params = fields.pop("params")
    lines = [f"{k} = {_fmt(v)}" for k, v in fields.items()]
    lines += [f"{k} = {_fmt(v)}" for k, v in sorted(params.items())]
    path.write_text("\n".join(lines) + "\n")


def write_report_csv(report: ErrorReport, path: Path) -> None:
    """CSV `iteration,erl2_y,erl2_z,runtime_s`; 'oracle-only' when no reference."""
    with open(path, "w") as fh:
        fh.write("iteration,erl2_y,erl2_z,runtime_s\n")
        for i in range(report.runtimes.size):
            ey = f"{report.erl2_y[i]:.17g}" if report.erl2_y is not None else "oracle-only"
            ez = f"{report.erl2_z[i]:.17g}" if report.erl2_z is not None else ""
            fh.write(f"{i},{ey},{ez},{report.runtimes[i]:.6f}\n")


def write_scaling_csv(result: ScalingResult, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("samples,mean_erl2_y,std_erl2_y\n")
        for m, mean, std in zip(result.sample_sizes, result.means, result.stds):
            fh.write(f"{m},{mean:.17g},{std:.17g}\n")


def write_run_artifacts(cfg: ExperimentConfig, report: ErrorReport) -> Path:
    """Write report.csv, paths.csv, config.txt (and figures) for one run."""
    out_dir = Path(cfg.out) / cfg.benchmark
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out_dir / "report.csv")
    with open(out_dir / "paths.csv", "w") as fh:
        dump_csv(report.first_solution, fh, n_samples=cfg.paths_samples)
    write_config_txt(cfg, out_dir / "config.txt")
    if cfg.figures:
        from . import figures

        if report.erl2_y is not None:
            figures.error_histogram(
                report.erl2_y, cfg.benchmark, out_dir / "errors_hist.png"
            )
        figures.solution_plot(
            report.first_solution, report.first_exact_y, out_dir / "solution.png"
        )
    return out_dir
