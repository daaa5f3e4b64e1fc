"""Unit tests for the worst-case-rate network: forward/backward, training,
checkpoints."""

import numpy as np
import pytest

from sigbsde import mlp
from sigbsde.errors import ShapeError


def loss_and_grads(params, inputs, grad_out):
    out, cache = mlp._forward_cached(params, inputs)
    grad_w, grad_b = mlp.backward(params, cache, grad_out)
    return float(np.sum(grad_out * out)), grad_w, grad_b


def max_relative_gradient_error(layer_sizes, seed, n_points=7, eps=1e-6):
    """Central finite differences against backward(), worst case over params."""
    rng = np.random.default_rng(seed)
    params = mlp.init_params(layer_sizes, seed=seed)
    inputs = rng.standard_normal((n_points, layer_sizes[0]))
    grad_out = rng.standard_normal(n_points)
    _, grad_w, grad_b = loss_and_grads(params, inputs, grad_out)
    worst = 0.0
    for tensors, grads in ((params.weights, grad_w), (params.biases, grad_b)):
        for tensor, grad in zip(tensors, grads):
            flat = tensor.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up, _, _ = loss_and_grads(params, inputs, grad_out)
                flat[i] = orig - eps
                down, _, _ = loss_and_grads(params, inputs, grad_out)
                flat[i] = orig
                fd = (up - down) / (2.0 * eps)
                analytic = grad.ravel()[i]
                denom = max(abs(fd), abs(analytic), 1e-8)
                worst = max(worst, abs(fd - analytic) / denom)
    return worst


class TestParams:
    def test_init_shapes_and_reproducibility(self):
        params = mlp.init_params((3, 5, 1), seed=4)
        assert params.layer_sizes == (3, 5, 1)
        assert params.weights[0].shape == (5, 3)
        assert params.biases[1].shape == (1,)
        np.testing.assert_array_equal(params.biases[0], np.zeros(5))
        again = mlp.init_params((3, 5, 1), seed=4)
        np.testing.assert_array_equal(params.weights[0], again.weights[0])

    def test_bad_layer_sizes_rejected(self):
        with pytest.raises(ShapeError):
            mlp.init_params((3,))
        with pytest.raises(ShapeError):
            mlp.init_params((3, 0, 1))

    def test_copy_is_independent(self):
        params = mlp.init_params((2, 3, 1), seed=0)
        clone = params.copy()
        clone.weights[0][0, 0] += 1.0
        assert params.weights[0][0, 0] != clone.weights[0][0, 0]


class TestForwardBackward:
    def test_hand_built_relu_network(self):
        # one ReLU hidden unit with unit weights: the network computes max(0, x)
        params = mlp.MlpParams(
            [np.array([[1.0]]), np.array([[1.0]])],
            [np.zeros(1), np.zeros(1)],
        )
        out = mlp.forward(params, np.array([[-2.0], [0.5], [3.0]]))
        np.testing.assert_allclose(out, [0.0, 0.5, 3.0])

    def test_input_shape_validated(self):
        params = mlp.init_params((3, 4, 1), seed=1)
        with pytest.raises(ShapeError):
            mlp.forward(params, np.zeros((5, 2)))
        with pytest.raises(ShapeError):
            mlp.forward(params, np.zeros(3))

    def test_gradients_match_finite_differences(self):
        assert max_relative_gradient_error((3, 5, 1), seed=2) <= 1e-5

    def test_gradients_on_the_default_architecture(self):
        err = max_relative_gradient_error(
            mlp.DEFAULT_LAYER_SIZES, seed=0, n_points=5
        )
        assert err <= 1e-5


class TestClampRate:
    def test_elementwise_bounds(self):
        raw = np.array([-2.0, 0.3, 5.0])
        lower = np.zeros(3)
        upper = np.ones(3)
        np.testing.assert_array_equal(
            mlp.clamp_rate(raw, lower, upper), [0.0, 0.3, 1.0]
        )

    def test_network_rate_respects_the_bounds(self):
        params = mlp.init_params(seed=3)
        y = np.linspace(-3.0, 3.0, 31)
        rate = mlp.network_rate(params, y, 0.2, 0.8)
        assert np.all(rate >= 0.2)
        assert np.all(rate <= 0.8)


class TestTraining:
    def test_loss_history_and_improvement(self):
        cfg = mlp.TrainConfig(
            epochs=300, batch_size=128, learning_rate=3e-3, seed=0,
            hidden_layers=2, hidden_units=8,
        )
        params, losses = mlp.train(cfg)
        assert losses.shape == (300,)
        assert np.all(np.isfinite(losses))
        # pushing rates toward the pointwise minimiser drives E[beta y] down
        assert losses[-50:].mean() < losses[:50].mean() - 0.02
        rate = mlp.network_rate(params, np.linspace(-2, 2, 41), 0.0, 1.0)
        assert np.all(rate >= 0.0) and np.all(rate <= 1.0)

    def test_training_is_seeded(self):
        cfg = mlp.TrainConfig(epochs=20, batch_size=32, seed=9)
        _, first = mlp.train(cfg)
        _, second = mlp.train(cfg)
        np.testing.assert_array_equal(first, second)

    def test_warm_start_uses_the_given_parameters(self):
        cfg = mlp.TrainConfig(epochs=5, batch_size=16, seed=1)
        start = mlp.init_params(cfg.layer_sizes(), seed=77)
        trained, _ = mlp.train(cfg, start.copy())
        assert not np.array_equal(trained.weights[0], mlp.init_params(cfg.layer_sizes(), seed=1).weights[0])


class TestNetworkDriver:
    def test_bounds_validated(self):
        params = mlp.init_params(seed=0)
        with pytest.raises(ShapeError):
            mlp.network_driver(params, 0.5, 0.2)
        with pytest.raises(ShapeError):
            mlp.network_driver(params, -0.1, 1.0)

    def test_driver_is_a_bounded_discount(self):
        params = mlp.init_params(seed=5)
        driver = mlp.network_driver(params, 0.0, 1.0)
        y = np.linspace(-2.0, 2.0, 21)
        out = driver.evaluate(0.3, y, y, np.zeros_like(y))
        assert np.all(np.abs(out) <= np.abs(y) + 1e-12)
        assert np.all(out[y > 0] <= 0.0)
        assert np.all(out[y < 0] >= 0.0)


class TestCheckpoints:
    def test_round_trip_is_exact(self, tmp_path):
        params = mlp.init_params((3, 4, 2, 1), seed=6)
        path = tmp_path / "checkpoint.csv"
        mlp.save_checkpoint(params, str(path))
        loaded = mlp.load_checkpoint(str(path))
        assert loaded.layer_sizes == params.layer_sizes
        for a, b in zip(loaded.weights, params.weights):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(loaded.biases, params.biases):
            np.testing.assert_array_equal(a, b)

    def test_header_mismatch_detected(self, tmp_path):
        params = mlp.init_params((3, 4, 1), seed=7)
        path = tmp_path / "checkpoint.csv"
        mlp.save_checkpoint(params, str(path))
        lines = path.read_text().splitlines()
        lines[0] = "3,5,1"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ShapeError):
            mlp.load_checkpoint(str(path))

    def test_loss_csv_layout(self, tmp_path):
        path = tmp_path / "losses.csv"
        mlp.save_loss_csv(np.array([0.5, -0.25]), str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "epoch,loss"
        assert lines[1] == "0,0.5"
        assert lines[2] == "1,-0.25"
