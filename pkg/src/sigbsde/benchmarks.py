"""Benchmark problems with known solutions, and the dynamic risk wrapper.

Each benchmark packages a driver, a forward model fed by the driving Brownian
batch, a terminal rule, and (where available) the exact solution as a function
of time and the forward state:

* linear          — driver independent of (y, z), lognormal terminal, fully
                    explicit three-term solution; cross-checked by an adjoint
                    (variation-of-constants) Monte Carlo representation.
* entropic        — quadratic driver (theta/2) z^2 on terminal -B_T; the exact
                    dynamic entropic risk is -B_t + theta (T - t)/2 with Z = -1.
* cir             — linear driver -x y discounting by a square-root rate; the
                    exact solution is the zero-coupon bond closed form.
* ambiguous       — worst-case discounting between two rates, driver
                    -(R 1{y<0} + r 1{y>=0}) y; no closed form (oracle-only),
                    dominated from below by every constant-rate solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conditional import CeConfig
from .errors import ShapeError
from .simulate import PathBatch, TimeGrid, cir_full_truncation, sample_brownian
from .solver import BsdeSolution, DriverSpec, solve_explicit

ExactFn = Callable[[float, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Benchmark:
    """A BSDE instance: forward model, terminal rule, driver, exact solution.

    terminal maps (forward values at T, total_time) to the terminal condition;
    exact_y / exact_z map (t, forward values at t, total_time) to the exact
    solution, or are None when the benchmark is oracle-only.
    """

    name: str
    driver: DriverSpec
    params: dict
    forward: Callable[[PathBatch], PathBatch]
    terminal: Callable[[np.ndarray, float], np.ndarray]
    exact_y: ExactFn | None = None
    exact_z: ExactFn | None = None

    def exact_y_paths(self, forward: PathBatch) -> np.ndarray | None:
        """Exact Y sampled on the grid, shape (M, N+1), or None."""
        if self.exact_y is None:
            return None
        times = forward.grid.times
        total = forward.grid.total_time
        out = np.empty_like(forward.values)
        for k, t in enumerate(times):
            out[:, k] = self.exact_y(t, forward.values[:, k], total)
        return out

    def exact_z_paths(self, forward: PathBatch) -> np.ndarray | None:
        """Exact Z sampled on grid indices 0..N-1, or None."""
        if self.exact_z is None:
            return None
        times = forward.grid.times
        total = forward.grid.total_time
        out = np.empty((forward.values.shape[0], forward.grid.n_steps))
        for k in range(forward.grid.n_steps):
            out[:, k] = self.exact_z(times[k], forward.values[:, k], total)
        return out


# ---------------------------------------------------------------------------
# entropic risk of -B_T


def entropic_closed_form(theta: float, t: float, b_t: np.ndarray, total_time: float):
    """Dynamic entropic risk of X = B_T: rho_t = -B_t + theta (T - t) / 2."""
    return -np.asarray(b_t, dtype=float) + theta * (total_time - t) / 2.0


def entropic_benchmark(theta: float = 0.3) -> Benchmark:
    if theta <= 0:
        raise ShapeError(f"theta must be > 0, got {theta}")

    def f(t, x, y, z):
        return 0.5 * theta * np.square(z)

    return Benchmark(
        name="entropic",
        driver=DriverSpec("entropic", f, lipschitz=False),
        params={"theta": theta},
        forward=lambda driving: driving,
        terminal=lambda x_t, total_time: -x_t,
        exact_y=lambda t, x, total_time: entropic_closed_form(theta, t, x, total_time),
        exact_z=lambda t, x, total_time: np.full_like(np.asarray(x, dtype=float), -1.0),
    )


def entropic_oracle_mc(theta: float, payoff: np.ndarray) -> tuple[float, float]:
    """Static entropic risk (1/theta) log E[exp(-theta X)] from payoff samples.

    Returns (estimate, standard error) with the delta-method SE.
    """
    e = np.exp(-theta * np.asarray(payoff, dtype=float))
    mean = e.mean()
    se = e.std(ddof=1) / math.sqrt(e.size)
    return math.log(mean) / theta, se / (mean * theta)


# ---------------------------------------------------------------------------
# linear driver with lognormal terminal


def linear_source(beta: float, t: float, b_t: np.ndarray) -> np.ndarray:
    """Driver value: beta^2 exp(2 beta B_t - beta^2 t)."""
    return beta**2 * np.exp(2.0 * beta * np.asarray(b_t, dtype=float) - beta**2 * t)


def linear_closed_form(beta: float, t: float, b_t: np.ndarray, total_time: float):
    """Exact solution for the linear benchmark.

    Y_t = e^{beta B_t - beta^2 t/2} + e^{beta^2 T} e^{2 beta B_t - 2 beta^2 t}
          - e^{2 beta B_t - beta^2 t}.
    """
    b = np.asarray(b_t, dtype=float)
    return (
        np.exp(beta * b - beta**2 * t / 2.0)
        + math.exp(beta**2 * total_time) * np.exp(2.0 * beta * b - 2.0 * beta**2 * t)
        - np.exp(2.0 * beta * b - beta**2 * t)
    )


def linear_closed_form_z(beta: float, t: float, b_t: np.ndarray, total_time: float):
    """Z of the linear benchmark (space derivative of the closed form)."""
    b = np.asarray(b_t, dtype=float)
    return (
        beta * np.exp(beta * b - beta**2 * t / 2.0)
        + 2.0 * beta * math.exp(beta**2 * total_time)
        * np.exp(2.0 * beta * b - 2.0 * beta**2 * t)
        - 2.0 * beta * np.exp(2.0 * beta * b - beta**2 * t)
    )


def linear_benchmark(beta: float = 1.0) -> Benchmark:
    if beta == 0:
        raise ShapeError("beta must be nonzero")

    def f(t, x, y, z):
        return linear_source(beta, t, x)

    return Benchmark(
        name="linear",
        driver=DriverSpec("linear", f),
        params={"beta": beta},
        forward=lambda driving: driving,
        terminal=lambda x_t, total_time: np.exp(
            beta * x_t - beta**2 * total_time / 2.0
        ),
        exact_y=lambda t, x, total_time: linear_closed_form(beta, t, x, total_time),
        exact_z=lambda t, x, total_time: linear_closed_form_z(beta, t, x, total_time),
    )


def linear_oracle_adjoint(
    alpha: float,
    beta_coef: float,
    phi: Callable[[float, np.ndarray], np.ndarray] | None,
    terminal: Callable[[np.ndarray], np.ndarray],
    t: float,
    total_time: float,
    b_t: float = 0.0,
    n_samples: int = 2**15,
    n_steps: int = 400,
    seed: int = 0,
) -> tuple[float, float]:
    """Variation-of-constants Monte Carlo for linear drivers.

    Estimates E[ Gamma_{t,T} X + int_t^T Gamma_{t,s} phi(s, B_s) ds | B_t = b_t ]
    where the adjoint follows dGamma = Gamma (alpha ds + beta_coef dB) from
    Gamma_{t,t} = 1, simulated forward from t with fresh increments (Euler);
    the time integral uses the trapezoidal rule. Returns (estimate, standard
    error of the mean).
    """
    if not 0.0 <= t <= total_time:
        raise ShapeError(f"t={t} outside [0, {total_time}]")
    horizon = total_time - t
    if horizon == 0.0:
        x = terminal(np.full(1, b_t))
        return float(x[0]), 0.0
    grid = TimeGrid(horizon, n_steps)
    driving = sample_brownian(n_samples, grid, seed)
    dt = grid.dt
    b = b_t + driving.values  # (M, n_steps+1), Brownian from the conditioned state
    gamma = np.empty_like(b)
    gamma[:, 0] = 1.0
    for k in range(n_steps):
        gamma[:, k + 1] = gamma[:, k] * (
            1.0 + alpha * dt + beta_coef * driving.increments[:, k]
        )
    estimate = gamma[:, -1] * terminal(b[:, -1])
    if phi is not None:
        integrand = np.empty_like(b)
        for k in range(n_steps + 1):
            integrand[:, k] = gamma[:, k] * phi(t + k * dt, b[:, k])
        weights = np.full(n_steps + 1, dt)
        weights[0] = weights[-1] = dt / 2.0
        estimate = estimate + integrand @ weights
    return float(estimate.mean()), float(estimate.std(ddof=1) / math.sqrt(n_samples))


# ---------------------------------------------------------------------------
# CIR discounting


def cir_bond_factors(a: float, b: float, sigma: float, tau: float) -> tuple[float, float]:
    """Zero-coupon bond factors (A, B) of the square-root rate model.

    gamma = sqrt(a^2 + 2 sigma^2);
    A(tau) = (2 gamma e^{(gamma + a) tau / 2} / D)^{2ab/sigma^2},
    B(tau) = 2 (e^{gamma tau} - 1) / D,
    D = (gamma + a)(e^{gamma tau} - 1) + 2 gamma.
    """
    if sigma <= 0:
        raise ShapeError(f"sigma must be > 0 for the bond formula, got {sigma}")
    gamma = math.sqrt(a * a + 2.0 * sigma * sigma)
    e = math.expm1(gamma * tau)  # e^{gamma tau} - 1
    denom = (gamma + a) * e + 2.0 * gamma
    big_a = (2.0 * gamma * math.exp((gamma + a) * tau / 2.0) / denom) ** (
        2.0 * a * b / sigma**2
    )
    big_b = 2.0 * e / denom
    return big_a, big_b


def cir_bond_price(
    a: float, b: float, sigma: float, rate: np.ndarray, tau: float
) -> np.ndarray:
    """E[exp(-int_0^tau rate)] given the current rate: A(tau) e^{-B(tau) rate}."""
    big_a, big_b = cir_bond_factors(a, b, sigma, tau)
    return big_a * np.exp(-big_b * np.asarray(rate, dtype=float))


def cir_benchmark(
    a: float = 1.0, b: float = 1.0, sigma: float = 1.0, x0: float = 1.0
) -> Benchmark:
    def f(t, x, y, z):
        return -x * y

    def exact_y(t, x, total_time):
        return cir_bond_price(a, b, sigma, x, total_time - t)

    def exact_z(t, x, total_time):
        x = np.asarray(x, dtype=float)
        _, big_b = cir_bond_factors(a, b, sigma, total_time - t)
        return -big_b * sigma * np.sqrt(np.maximum(x, 0.0)) * exact_y(t, x, total_time)

    return Benchmark(
        name="cir",
        driver=DriverSpec("cir", f),
        params={"a": a, "b": b, "sigma": sigma, "x0": x0},
        forward=lambda driving: cir_full_truncation(a, b, sigma, x0, driving),
        terminal=lambda x_t, total_time: np.ones_like(x_t),
        exact_y=exact_y,
        exact_z=exact_z,
    )


def cir_oracle_mc(
    a: float,
    b: float,
    sigma: float,
    x0: float,
    total_time: float,
    n_samples: int = 2**14,
    n_steps: int = 2000,
    seed: int = 0,
) -> tuple[float, float]:
    """Feynman-Kac Monte Carlo check value E[exp(-int_0^T rate ds)].

    Full-truncation rate paths on a fine grid, trapezoidal time integral.
    Returns (estimate, standard error of the mean).
    """
    grid = TimeGrid(total_time, n_steps)
    driving = sample_brownian(n_samples, grid, seed)
    rate = cir_full_truncation(a, b, sigma, x0, driving)
    weights = np.full(n_steps + 1, grid.dt)
    weights[0] = weights[-1] = grid.dt / 2.0
    discounted = np.exp(-(rate.values @ weights))
    return float(discounted.mean()), float(discounted.std(ddof=1) / math.sqrt(n_samples))


# ---------------------------------------------------------------------------
# ambiguous interest rate


def ambiguous_rate(r: float, big_r: float, y: np.ndarray) -> np.ndarray:
    """Worst-case rate R 1{y < 0} + r 1{y >= 0}."""
    y = np.asarray(y, dtype=float)
    return np.where(y < 0.0, big_r, r)


def ambiguous_driver(r: float, big_r: float) -> DriverSpec:
    """Driver f(t, x, y, z) = -(R 1{y<0} + r 1{y>=0}) y of worst-case discounting."""
    if not 0.0 <= r <= big_r:
        raise ShapeError(f"need 0 <= r <= R, got r={r}, R={big_r}")

    def f(t, x, y, z):
        return -ambiguous_rate(r, big_r, y) * y

    return DriverSpec("ambiguous", f)


def ambiguous_benchmark(r: float = 0.0, big_r: float = 1.0) -> Benchmark:
    """Worst-case discounted risk of X = B_T; no closed form (oracle-only)."""
    return Benchmark(
        name="ambiguous",
        driver=ambiguous_driver(r, big_r),
        params={"r": r, "R": big_r},
        forward=lambda driving: driving,
        terminal=lambda x_t, total_time: -x_t,
        exact_y=None,
        exact_z=None,
    )


def constant_beta_reference(
    beta: float, t: float, b_t: np.ndarray, total_time: float
) -> np.ndarray:
    """Risk of X = B_T under a constant rate beta: -e^{-beta (T - t)} B_t."""
    return -math.exp(-beta * (total_time - t)) * np.asarray(b_t, dtype=float)


# ---------------------------------------------------------------------------
# dynamic risk measure wrapper


@dataclass(frozen=True)
class RiskMeasurePath:
    """rho_t(X) := Y_t of the BSDE with terminal -X, on the grid."""

    rho: np.ndarray  # (M, N+1)
    solution: BsdeSolution


def risk_measure_path(
    payoff: np.ndarray,
    driver: DriverSpec,
    forward: PathBatch,
    brownian: PathBatch,
    cfg: CeConfig,
    z_winsor: float = 0.01,
) -> RiskMeasurePath:
    """Dynamic risk of a terminal payoff: solve the BSDE with terminal -payoff."""
    solution = solve_explicit(
        -np.asarray(payoff, dtype=float), driver, forward, brownian, cfg,
        z_winsor=z_winsor,
    )
    return RiskMeasurePath(solution.y, solution)


# ---------------------------------------------------------------------------
# registry


def make_benchmark(name: str, **params) -> Benchmark:
    """Construct a benchmark by name; unknown keys raise ShapeError."""
    factories = {
        "linear": linear_benchmark,
        "entropic": entropic_benchmark,
        "cir": cir_benchmark,
        "ambiguous": ambiguous_benchmark,
    }
    if name not in factories:
        raise ShapeError(
            f"unknown benchmark {name!r}; choose from {sorted(factories)}"
        )
    return factories[name](**params)


BENCHMARK_NAMES = ("linear", "entropic", "cir", "ambiguous")

#: constructor keyword names accepted per benchmark
BENCHMARK_PARAMS = {
    "linear": ("beta",),
    "entropic": ("theta",),
    "cir": ("a", "b", "sigma", "x0"),
    "ambiguous": ("r", "big_r"),
}
