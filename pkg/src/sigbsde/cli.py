"""Command line interface.

Subcommands:
  run        solve one benchmark repeatedly, write report.csv / paths.csv /
             config.txt (and figures) under <out>/<benchmark>/
  scale      sample-size scaling study with a fitted log-log slope
  train-air  train the worst-case-rate network, write checkpoint + loss CSV
  solve-air  solve the ambiguous-rate problem with a trained checkpoint or
             the analytic indicator rule, compare against constant rates

A flat `key = value` config file can preset any flag; explicit flags win.
"""

from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import click
import numpy as np

from . import figures as figs
from . import mlp
from .benchmarks import ambiguous_benchmark, constant_beta_reference, BENCHMARK_NAMES
from .errors import (
    RidgeError,
    ShapeError,
    SimulationError,
    SolverError,
    TrainingError,
)
from .experiments import (
    ExperimentConfig,
    run_experiment,
    scaling_study,
    solve_benchmark,
    write_config_txt,
    write_run_artifacts,
    write_scaling_csv,
)
from .metrics import erl2
from .solver import dump_csv, summary

_ERRORS = (ShapeError, RidgeError, SimulationError, SolverError, TrainingError)

#: config-file key -> value type; keys mirror the CLI flags
_CONFIG_TYPES = {
    "benchmark": str,
    "samples": int,
    "steps": int,
    "total_time": float,
    "depth": int,
    "ridge": float,
    "iterations": int,
    "seed": int,
    "scheme": str,
    "normalize_time": bool,
    "z_winsor": float,
    "out": str,
    "figures": bool,
    "paths_samples": int,
    "theta": float,
    "beta": float,
    "a": float,
    "b": float,
    "sigma": float,
    "x0": float,
    "r": float,
    "R": float,
    "m_list": str,
}

#: per-benchmark: config/flag key -> constructor keyword
_PARAM_KEYS = {
    "linear": {"beta": "beta"},
    "entropic": {"theta": "theta"},
    "cir": {"a": "a", "b": "b", "sigma": "sigma", "x0": "x0"},
    "ambiguous": {"r": "r", "R": "big_r"},
}

#: config/flag key -> click parameter name
_PARAM_NAMES = {
    "theta": "theta", "beta": "beta", "a": "a", "b": "b",
    "sigma": "sigma", "x0": "x0", "r": "r", "R": "big_r",
}


def parse_config_file(path: str) -> dict:
    """Read flat `key = value` lines; '#' starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise click.UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        kind = _CONFIG_TYPES[key]
        try:
            if kind is bool:
                values[key] = text.lower() in ("1", "true", "yes", "on")
            else:
                values[key] = kind(text)
        except ValueError as exc:
            raise click.UsageError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def _explicit(ctx: click.Context, param_name: str) -> bool:
    source = ctx.get_parameter_source(param_name)
    return source is not None and source.name != "DEFAULT"


def _merge(ctx: click.Context, key: str, param_name: str, kwargs: dict, file_values: dict):
    """Explicit CLI flag beats config file beats flag default."""
    if _explicit(ctx, param_name):
        return kwargs[param_name]
    return file_values.get(key, kwargs[param_name])


def _build_config(ctx: click.Context, kwargs: dict) -> ExperimentConfig:
    file_values = parse_config_file(kwargs["config"]) if kwargs.get("config") else {}

    def get(key: str, param_name: str | None = None):
        return _merge(ctx, key, param_name or key, kwargs, file_values)

    benchmark = get("benchmark")
    if benchmark not in BENCHMARK_NAMES:
        raise click.UsageError(f"unknown benchmark {benchmark!r}")
    params = {
        ctor_key: get(key, _PARAM_NAMES[key])
        for key, ctor_key in _PARAM_KEYS[benchmark].items()
    }
    for key, param_name in _PARAM_NAMES.items():
        if _explicit(ctx, param_name) and key not in _PARAM_KEYS[benchmark]:
            raise click.UsageError(f"--{key} does not apply to benchmark {benchmark!r}")
    try:
        return ExperimentConfig(
            benchmark=benchmark,
            samples=get("samples"),
            steps=get("steps"),
            total_time=get("total_time"),
            depth=get("depth"),
            ridge_lambda=get("ridge"),
            iterations=get("iterations"),
            seed=get("seed"),
            scheme=get("scheme"),
            normalize_time=get("normalize_time"),
            z_winsor=get("z_winsor"),
            out=get("out"),
            figures=get("figures"),
            paths_samples=get("paths_samples"),
            params=params,
        )
    except ShapeError as exc:
        raise click.UsageError(str(exc))


def _experiment_options(fn):
    decorators = [
        click.option("--benchmark", default="entropic", show_default=True,
                     type=click.Choice(BENCHMARK_NAMES), help="Benchmark problem."),
        click.option("--samples", default=2**13, show_default=True, help="Paths per solve."),
        click.option("--steps", default=500, show_default=True, help="Time steps."),
        click.option("--total-time", default=1.0, show_default=True, help="Horizon T."),
        click.option("--depth", default=3, show_default=True, help="Signature depth."),
        click.option("--ridge", default=0.3, show_default=True, help="Ridge penalty."),
        click.option("--iterations", default=50, show_default=True,
                     help="Independent repetitions."),
        click.option("--seed", default=7, show_default=True, help="Master seed."),
        click.option("--scheme", default="explicit", show_default=True,
                     type=click.Choice(["explicit", "implicit"])),
        click.option("--normalize-time/--raw-time", "normalize_time", default=False,
                     help="Rescale the signature clock to [0, 1]."),
        click.option("--z-winsor", default=0.01, show_default=True,
                     help="Per-tail winsorization mass for fitted Z (0 disables)."),
        click.option("--out", default="results", show_default=True,
                     help="Output directory root."),
        click.option("--figures/--no-figures", "figures", default=True,
                     help="Render PNG figures next to the CSVs."),
        click.option("--paths-samples", default=32, show_default=True,
                     help="Sample paths written to paths.csv."),
        click.option("--config", default=None, type=click.Path(exists=True),
                     help="Flat key = value preset file."),
        click.option("--theta", default=0.3, show_default=True,
                     help="[entropic] risk aversion."),
        click.option("--beta", default=1.0, show_default=True,
                     help="[linear] exponent scale."),
        click.option("--a", default=1.0, show_default=True,
                     help="[cir] mean-reversion speed."),
        click.option("--b", default=1.0, show_default=True,
                     help="[cir] long-run level."),
        click.option("--sigma", default=1.0, show_default=True,
                     help="[cir] volatility."),
        click.option("--x0", default=1.0, show_default=True,
                     help="[cir] initial rate."),
        click.option("--r", default=0.0, show_default=True,
                     help="[ambiguous] lower rate."),
        click.option("--R", "big_r", default=1.0, show_default=True,
                     help="[ambiguous] upper rate."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
def main():
    """Signature-regression BSDE solver and dynamic risk benchmarks."""


@main.command()
@_experiment_options
@click.pass_context
def run(ctx, **kwargs):
    """Repeatedly solve one benchmark and report path errors."""
    cfg = _build_config(ctx, kwargs)
    try:
        report = run_experiment(cfg)
        out_dir = write_run_artifacts(cfg, report)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    if report.erl2_y is not None:
        click.echo(
            f"{cfg.benchmark}: mean ERL2(Y) = {report.mean_y:.6f} "
            f"(std {report.std_y:.6f}, {cfg.iterations} iterations)"
        )
    else:
        click.echo(f"{cfg.benchmark}: oracle-only (no exact solution)")
    click.echo(f"artifacts in {out_dir}")


@main.command()
@_experiment_options
@click.option("--m-list", default="512,1024,2048,4096,8192", show_default=True,
              help="Comma-separated sample sizes.")
@click.pass_context
def scale(ctx, **kwargs):
    """Error against sample count, with a fitted log-log slope."""
    file_values = parse_config_file(kwargs["config"]) if kwargs.get("config") else {}
    m_text = _merge(ctx, "m_list", "m_list", kwargs, file_values)
    kwargs.pop("m_list")
    try:
        sizes = [int(part) for part in str(m_text).split(",") if part.strip()]
        if not sizes:
            raise ValueError("empty list")
    except ValueError:
        raise click.UsageError(f"bad --m-list {m_text!r}")
    cfg = _build_config(ctx, kwargs)
    try:
        result = scaling_study(cfg, sizes)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    out_dir = Path(cfg.out) / cfg.benchmark
    out_dir.mkdir(parents=True, exist_ok=True)
    write_scaling_csv(result, out_dir / "scaling.csv")
    write_config_txt(cfg, out_dir / "config.txt")
    if cfg.figures and not result.degenerate:
        figs.scaling_plot(result.sample_sizes, result.means, result.slope,
                          out_dir / "scaling.png")
    if result.degenerate:
        click.echo("scaling degenerate: slope undefined")
    else:
        click.echo(f"log-log slope: {result.slope:.4f}")
    click.echo(f"artifacts in {out_dir}")


@main.command("train-air")
@click.option("--epochs", default=2000, show_default=True)
@click.option("--batch", default=256, show_default=True)
@click.option("--lr", default=1e-3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--hidden-layers", default=3, show_default=True)
@click.option("--hidden-units", default=11, show_default=True)
@click.option("--out", default="results", show_default=True)
@click.option("--figures/--no-figures", "render_figures", default=True)
def train_air(epochs, batch, lr, seed, hidden_layers, hidden_units, out, render_figures):
    """Train the worst-case-rate network on the E[rate * y] objective."""
    cfg = mlp.TrainConfig(epochs, batch, lr, seed, hidden_layers, hidden_units)
    try:
        params, losses = mlp.train(cfg)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    out_dir = Path(out) / "air"
    out_dir.mkdir(parents=True, exist_ok=True)
    mlp.save_checkpoint(params, str(out_dir / "checkpoint.csv"))
    mlp.save_loss_csv(losses, str(out_dir / "losses.csv"))
    if render_figures:
        figs.loss_plot(losses, out_dir / "loss_curve.png")
        y_grid = np.linspace(-2.0, 2.0, 401)
        learned = mlp.network_rate(params, y_grid, 0.0, 1.0)
        analytic = np.where(y_grid < 0.0, 1.0, 0.0)
        figs.rate_plot(y_grid, learned, analytic, out_dir / "rate_fit.png")
    click.echo(f"final loss {losses[-1]:.6f}; checkpoint in {out_dir}")


@main.command("solve-air")
@click.option("--checkpoint", default=None, type=click.Path(exists=True),
              help="Trained network checkpoint.")
@click.option("--analytic", is_flag=True, help="Use the indicator rate rule instead.")
@click.option("--samples", default=2**11, show_default=True)
@click.option("--steps", default=100, show_default=True)
@click.option("--total-time", default=1.0, show_default=True)
@click.option("--depth", default=3, show_default=True)
@click.option("--ridge", default=0.3, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--r", default=0.0, show_default=True, help="Lower rate.")
@click.option("--R", "big_r", default=1.0, show_default=True, help="Upper rate.")
@click.option("--z-winsor", default=0.01, show_default=True,
              help="Per-tail winsorization mass for fitted Z (0 disables).")
@click.option("--out", default="results", show_default=True)
@click.option("--figures/--no-figures", "render_figures", default=True)
@click.option("--paths-samples", default=32, show_default=True)
def solve_air(checkpoint, analytic, samples, steps, total_time, depth, ridge, seed,
              r, big_r, z_winsor, out, render_figures, paths_samples):
    """Solve the ambiguous-rate risk problem and compare to constant rates."""
    if (checkpoint is None) == (not analytic):
        raise click.UsageError("pass exactly one of --checkpoint or --analytic")
    try:
        cfg = ExperimentConfig(
            benchmark="ambiguous", samples=samples, steps=steps, total_time=total_time,
            depth=depth, ridge_lambda=ridge, iterations=1, seed=seed, out=out,
            figures=render_figures, paths_samples=paths_samples, z_winsor=z_winsor,
            params={"r": r, "big_r": big_r},
        )
        bench = ambiguous_benchmark(r, big_r)
        if checkpoint is not None:
            params = mlp.load_checkpoint(checkpoint)
            bench = dataclasses.replace(bench, driver=mlp.network_driver(params, r, big_r))
        solution, _, _ = solve_benchmark(bench, cfg, cfg.seed)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    out_dir = Path(out) / "air-solve"
    out_dir.mkdir(parents=True, exist_ok=True)
    times = solution.grid.times
    brownian = solution.forward  # forward model is the identity here
    references = {
        beta: np.array([
            constant_beta_reference(beta, t, brownian.values[:, k], total_time).mean()
            for k, t in enumerate(times)
        ])
        for beta in (0.0, 0.5, 1.0)
    }
    mean_rho = solution.y.mean(axis=0)
    with open(out_dir / "dominance.csv", "w") as fh:
        fh.write("k,t,mean_rho,ref_beta_0,ref_beta_0.5,ref_beta_1\n")
        for k, t in enumerate(times):
            fh.write(
                f"{k},{t:.17g},{mean_rho[k]:.17g},{references[0.0][k]:.17g},"
                f"{references[0.5][k]:.17g},{references[1.0][k]:.17g}\n"
            )
    with open(out_dir / "paths.csv", "w") as fh:
        dump_csv(solution, fh, n_samples=paths_samples)
    write_config_txt(cfg, out_dir / "config.txt")
    lines = [summary(solution)]
    if checkpoint is not None:
        try:
            analytic_solution, _, _ = solve_benchmark(
                ambiguous_benchmark(r, big_r), cfg, cfg.seed
            )
        except _ERRORS as exc:
            raise click.ClickException(str(exc))
        gap = erl2(solution.y, analytic_solution.y, solution.grid.dt)
        lines.append(f"erl2 vs analytic rule: {gap:.6f}")
        click.echo(lines[-1])
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    if render_figures:
        figs.rho_compare_plot(times, mean_rho, references, out_dir / "rho_compare.png")
    click.echo(f"rho_0 = {mean_rho[0]:.6f}; artifacts in {out_dir}")


if __name__ == "__main__":
    sys.exit(main())
