"""Small dense ReLU network that learns the worst-case discount rate.

The network phi: R^3 -> R maps (y, r, R) to a raw rate which is clamped into
[r, R]; training minimises E[beta * y] over y ~ N(0, 1) and uniform rate
bounds, which drives beta toward R where y < 0 and toward r where y >= 0 —
the known pointwise minimiser. Forward, backward and the Adam update are all
plain numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TrainingError
from .solver import DriverSpec

#: input (y, r, R), three hidden ReLU layers of width 11, scalar identity output
DEFAULT_LAYER_SIZES = (3, 11, 11, 11, 1)


@dataclass
class MlpParams:
    """Per-layer weight matrices (out x in) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[1]] + [w.shape[0] for w in self.weights])

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_params(layer_sizes=DEFAULT_LAYER_SIZES, seed: int = 0) -> MlpParams:
    """He-scaled Gaussian weights, zero biases."""
    sizes = tuple(layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ShapeError(f"bad layer sizes {sizes}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * math.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def forward(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """Raw network output, shape (P,); inputs shape (P, n_in).

    Hidden activations are ReLU, the output layer is the identity.
    """
    out, _ = _forward_cached(params, inputs)
    return out


def _forward_cached(params: MlpParams, inputs: np.ndarray):
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.weights[0].shape[1]:
        raise ShapeError(
            f"inputs shape {x.shape} incompatible with first layer "
            f"{params.weights[0].shape}"
        )
    pre_acts = []
    activations = [x]
    n_layers = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = activations[-1] @ w.T + b
        pre_acts.append(z)
        activations.append(np.maximum(z, 0.0) if i < n_layers - 1 else z)
    return activations[-1][:, 0], (pre_acts, activations)


def backward(params: MlpParams, cache, grad_out: np.ndarray):
    """Gradients of sum(grad_out * output) w.r.t. every weight and bias."""
    pre_acts, activations = cache
    n_layers = len(params.weights)
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    delta = grad_out[:, None]  # gradient at the (identity) output layer
    for i in range(n_layers - 1, -1, -1):
        grad_w[i] = delta.T @ activations[i]
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * (pre_acts[i - 1] > 0.0)
    return grad_w, grad_b


def clamp_rate(raw: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """beta = max(lower, min(upper, raw)), elementwise."""
    return np.minimum(np.maximum(raw, lower), upper)


@dataclass(frozen=True)
class TrainConfig:
    """Adam training loop settings for the worst-case-rate objective."""

    epochs: int = 2000
    batch_size: int = 256
    learning_rate: float = 1e-3
    seed: int = 0
    hidden_layers: int = 3
    hidden_units: int = 11

    def layer_sizes(self) -> tuple[int, ...]:
        return (3, *([self.hidden_units] * self.hidden_layers), 1)


def train(cfg: TrainConfig, params: MlpParams | None = None):
    """Train on the objective E[clamp(phi(y, r, R), r, R) * y].

    Per batch: y ~ N(0,1); (r, R) uniform on [0,1] sorted so r <= R. The clamp
    passes zero gradient where it is active. Returns (params, loss_history)
    with one loss entry per epoch; raises TrainingError on divergence.
    """
    if params is None:
        params = init_params(cfg.layer_sizes(), cfg.seed)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((cfg.seed, 1))))
    flat = params.weights + params.biases
    m_state = [np.zeros_like(p) for p in flat]
    v_state = [np.zeros_like(p) for p in flat]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    losses = np.empty(cfg.epochs)
    step = 0
    for epoch in range(cfg.epochs):
        y = rng.standard_normal(cfg.batch_size)
        bounds = np.sort(rng.uniform(size=(cfg.batch_size, 2)), axis=1)
        lower, upper = bounds[:, 0], bounds[:, 1]
        inputs = np.column_stack([y, lower, upper])

        raw, cache = _forward_cached(params, inputs)
        beta = clamp_rate(raw, lower, upper)
        loss = float(np.mean(beta * y))
        if not math.isfinite(loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        losses[epoch] = loss

        inside = (raw > lower) & (raw < upper)
        grad_out = np.where(inside, y, 0.0) / cfg.batch_size
        grad_w, grad_b = backward(params, cache, grad_out)

        step += 1
        for p, g, m, v in zip(flat, grad_w + grad_b, m_state, v_state):
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * np.square(g)
            m_hat = m / (1 - beta1**step)
            v_hat = v / (1 - beta2**step)
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return params, losses


def network_rate(params: MlpParams, y: np.ndarray, lower: float, upper: float):
    """Clamped rate at fixed bounds, vectorized over y."""
    y = np.asarray(y, dtype=float)
    inputs = np.column_stack(
        [y, np.full_like(y, lower), np.full_like(y, upper)]
    )
    return clamp_rate(forward(params, inputs), lower, upper)


def network_driver(params: MlpParams, lower: float, upper: float) -> DriverSpec:
    """BSDE driver f(t, x, y, z) = -beta_net(y) * y with frozen rate bounds."""
    if not 0.0 <= lower <= upper:
        raise ShapeError(f"need 0 <= lower <= upper, got {lower}, {upper}")

    def f(t, x, y, z):
        return -network_rate(params, y, lower, upper) * np.asarray(y, dtype=float)

    return DriverSpec("ambiguous-net", f)


def save_checkpoint(params: MlpParams, path: str) -> None:
    """Flat text checkpoint: layer sizes, then one row-major line per tensor."""
    with open(path, "w") as fh:
        fh.write(",".join(str(s) for s in params.layer_sizes) + "\n")
        for i, (w, b) in enumerate(zip(params.weights, params.biases)):
            w_txt = ",".join(f"{v:.17g}" for v in w.ravel())
            fh.write(f"W{i},{w.shape[0]},{w.shape[1]},{w_txt}\n")
            b_txt = ",".join(f"{v:.17g}" for v in b)
            fh.write(f"b{i},{b.shape[0]},{b_txt}\n")


def load_checkpoint(path: str) -> MlpParams:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    sizes = tuple(int(s) for s in lines[0].split(","))
    weights, biases = [], []
    idx = 1
    for _ in range(len(sizes) - 1):
        parts = lines[idx].split(",")
        rows, cols = int(parts[1]), int(parts[2])
        weights.append(np.array([float(v) for v in parts[3:]]).reshape(rows, cols))
        idx += 1
        parts = lines[idx].split(",")
        biases.append(np.array([float(v) for v in parts[2:]]))
        idx += 1
    params = MlpParams(weights, biases)
    if params.layer_sizes != sizes:
        raise ShapeError(
            f"checkpoint header {sizes} does not match tensors {params.layer_sizes}"
        )
    return params


def save_loss_csv(losses: np.ndarray, path: str) -> None:
    """CSV `epoch,loss` with a header row."""
    with open(path, "w") as fh:
        fh.write("epoch,loss\n")
        for i, v in enumerate(losses):
            fh.write(f"{i},{v:.17g}\n")
