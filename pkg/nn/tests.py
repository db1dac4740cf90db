import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from dataio.types import Intent, WindowBatch, WindowedSample

from .checkpoint import load_checkpoint, save_checkpoint
from .exceptions import CheckpointError, OracleError, ShapeError
from .gradcheck import (
    central_difference, fd_gradient, full_gradient_suite, random_batch, relative_error, tiny_gradient_suite,
)
from .network import (
    ArrayBatch, batch_gradient, batch_loss, forward, hessian_vector_product, init_params, predict, predict_labels,
    predict_proba,
)
from .optim import AdamState, adam_step
from .params import GradientVector, ModelParams, NetworkConfig

TINY = NetworkConfig(layer_sizes=(4, 3, 2, 3))


def bias_only(logits, config=TINY):
    """Red con pesos en cero cuyo sesgo de salida fija los logits."""
    layers = [(np.zeros((n_out, n_in)), np.zeros(n_out)) for n_out, n_in in config.shapes]
    layers[-1] = (layers[-1][0], np.asarray(logits, dtype=np.float64))
    return ModelParams.from_layers(config, layers)


class ParamsTests(SimpleTestCase):
    def test_default_architecture(self):
        config = NetworkConfig()
        self.assertEqual(config.layer_sizes, (1600, 512, 128, 3))
        self.assertEqual(config.n_params, 512 * 1600 + 512 + 128 * 512 + 128 + 3 * 128 + 3)
        self.assertEqual(NetworkConfig.for_windows(200).input_dim, 1600)

    def test_unknown_activation(self):
        with self.assertRaises(ShapeError):
            NetworkConfig(activation='sigmoid')

    def test_flatten_round_trip(self):
        params = init_params(TINY, seed=4)
        again = ModelParams.unflatten(TINY, params.flatten())
        assert_array_equal(again.vector, params.vector)
        for (w, b), (w2, b2) in zip(params.layers(), again.layers()):
            assert_array_equal(w, w2)
            assert_array_equal(b, b2)

    def test_vector_arithmetic(self):
        params = init_params(TINY, seed=1)
        grad = GradientVector(TINY, np.ones(TINY.n_params))
        moved = params - grad * 0.5
        self.assertIsInstance(moved, ModelParams)
        assert_allclose(moved.vector, params.vector - 0.5)
        with self.assertRaises(ShapeError):
            params + GradientVector.zeros(NetworkConfig(layer_sizes=(4, 3)))

    def test_wrong_length(self):
        with self.assertRaises(ShapeError):
            ModelParams(TINY, np.zeros(TINY.n_params + 1))


class InitTests(SimpleTestCase):
    def test_same_seed_same_params(self):
        assert_array_equal(init_params(TINY, seed=3).vector, init_params(TINY, seed=3).vector)
        self.assertFalse(np.array_equal(init_params(TINY, seed=3).vector, init_params(TINY, seed=4).vector))

    def test_full_network_bounds(self):
        params = init_params(NetworkConfig(), seed=0)
        (w1, b1), *rest = params.layers()
        self.assertLessEqual(np.abs(w1).max(), math.sqrt(6 / 2112))
        self.assertTrue(all(np.all(b == 0) for _, b in [(w1, b1), *rest]))


class ForwardTests(SimpleTestCase):
    def test_zero_params(self):
        assert_array_equal(forward(ModelParams.zeros(TINY), np.array([0.3, -0.2, 1.0, 0.0])), np.zeros(3))

    def test_bias_only(self):
        assert_array_equal(forward(bias_only([0.1, -2.0, 3.0]), np.ones(4)), [0.1, -2.0, 3.0])

    def test_hand_computed_instance(self):
        params = ModelParams.from_layers(TINY, [
            (np.array([[1., 0, 0, 0], [0, 1, 0, 0], [1, 1, 1, 1]]), np.array([0., 0, 0.5])),
            (np.array([[1., 1, 1], [1, -1, 2]]), np.array([0., -1])),
            (np.array([[1., 0], [0, 1], [1, -1]]), np.array([0.5, 0, 0])),
        ])
        # z1 = [1, -1, 1] -> [1, 0, 1]; z2 = [2, 2]; logits = [2.5, 2, 0]
        assert_allclose(forward(params, np.array([1.0, -1.0, 0.5, 0.0])), [2.5, 2.0, 0.0])

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            forward(ModelParams.zeros(TINY), np.zeros(5))

    def test_windowed_sample_uses_channel_major_order(self):
        rng = np.random.default_rng(0)
        batch = WindowBatch.from_signal(rng.uniform(-1, 1, size=(8, 260)), [199, 259], [0, 2], 200)
        params = init_params(NetworkConfig.for_windows(200), seed=0)
        assert_allclose(forward(params, batch[1]), forward(params, batch.inputs()[1]))


class PredictTests(SimpleTestCase):
    def test_uniform(self):
        dist = predict(bias_only([0, 0, 0]), np.zeros(4))
        assert_allclose(dist.as_array(), [1 / 3] * 3)

    def test_large_logits_do_not_overflow(self):
        dist = predict(bias_only([1000.0, 0.0, 0.0]), np.zeros(4))
        self.assertAlmostEqual(dist.p_relax, 1.0)
        self.assertEqual(dist.most_likely(), Intent.RELAX)

    def test_closed_form(self):
        dist = predict(bias_only([math.log(1), math.log(2), math.log(7)]), np.zeros(4))
        assert_allclose(dist.as_array(), [0.1, 0.2, 0.7], atol=1e-12)

    def test_extreme_logits_stay_normalised(self):
        probs = predict_proba(bias_only([1e6, -1e6, 0.0]), (np.zeros((2, 4)), [0, 1]))
        self.assertTrue(np.all(probs >= 0) and np.all(probs <= 1))
        assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


class LossTests(SimpleTestCase):
    def test_uniform_predictor(self):
        batch = random_batch(np.random.default_rng(0), 4, 7)
        self.assertAlmostEqual(batch_loss(ModelParams.zeros(TINY), batch), math.log(3), places=12)

    def test_margin_drives_loss_to_zero(self):
        batch = ArrayBatch(np.zeros((3, 4)), [0, 0, 0])
        losses = [batch_loss(bias_only([m, 0, 0]), batch) for m in (1, 10, 40)]
        self.assertTrue(losses[0] > losses[1] > losses[2])
        self.assertLess(losses[2], 1e-15)

    def test_two_sample_hand_arithmetic(self):
        logits = np.array([1.0, 2.0, 0.5])
        lse = math.log(sum(math.exp(v) for v in logits))
        batch = ArrayBatch(np.zeros((2, 4)), [0, 2])
        expected = ((lse - 1.0) + (lse - 0.5)) / 2
        self.assertAlmostEqual(batch_loss(bias_only(logits), batch), expected, places=12)

    def test_pair_of_windows_is_a_sequence_not_inputs_and_labels(self):
        rng = np.random.default_rng(4)
        config = NetworkConfig(layer_sizes=(8, 3, 3))
        params = init_params(config, seed=4)
        pair = (
            WindowedSample(rng.uniform(-1, 1, (8, 1)), Intent.OPEN, 0),
            WindowedSample(rng.uniform(-1, 1, (8, 1)), Intent.CLOSE, 1),
        )
        self.assertEqual(batch_loss(params, pair), batch_loss(params, list(pair)))
        assert_array_equal(batch_gradient(params, pair).vector, batch_gradient(params, list(pair)).vector)
        self.assertEqual(predict_labels(params, pair).shape, (2,))

    def test_empty_batch(self):
        with self.assertRaises(ShapeError):
            batch_loss(ModelParams.zeros(TINY), ArrayBatch(np.zeros((0, 4)), []))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        params = init_params(TINY, seed=2)
        batch = random_batch(rng, 4, 9)
        order = rng.permutation(9)
        shuffled = ArrayBatch(batch.inputs[order], batch.labels[order])
        self.assertAlmostEqual(batch_loss(params, batch), batch_loss(params, shuffled), places=14)


class GradientTests(SimpleTestCase):
    def test_zero_params_output_bias(self):
        batch = ArrayBatch(np.random.default_rng(0).uniform(-1, 1, (5, 4)), [2] * 5)
        grad = batch_gradient(ModelParams.zeros(TINY), batch)
        assert_allclose(grad.layers()[-1][1], np.array([1 / 3, 1 / 3, 1 / 3]) - np.eye(3)[2])

    def test_duplicated_batch(self):
        rng = np.random.default_rng(1)
        params = init_params(TINY, seed=1)
        batch = random_batch(rng, 4, 6)
        doubled = ArrayBatch(np.vstack([batch.inputs, batch.inputs]), np.concatenate([batch.labels] * 2))
        assert_allclose(batch_gradient(params, doubled).vector, batch_gradient(params, batch).vector,
                        rtol=1e-12, atol=1e-15)

    def test_chunking_does_not_change_result(self):
        rng = np.random.default_rng(5)
        params = init_params(TINY, seed=5)
        batch = random_batch(rng, 4, 11)
        assert_allclose(batch_gradient(params, batch, chunk=2).vector,
                        batch_gradient(params, batch, chunk=64).vector, rtol=1e-12, atol=1e-15)

    def test_tiny_oracle(self):
        report = tiny_gradient_suite(trials=6, seed=3)
        self.assertTrue(report.passed, report.to_dict())

    def test_full_network_oracle(self):
        report = full_gradient_suite(n_coordinates=25, seed=1)
        self.assertTrue(report.passed, report.to_dict())


class HessianVectorTests(SimpleTestCase):
    def check_against_gradient_differences(self, activation, seed):
        config = NetworkConfig(layer_sizes=(5, 4, 3, 3), activation=activation)
        rng = np.random.default_rng(seed)
        params = ModelParams(config, rng.normal(0, 0.5, config.n_params))
        batch = random_batch(rng, 5, 6)
        direction = GradientVector(config, rng.normal(size=config.n_params))
        h = 1e-5
        estimate = (batch_gradient(params + direction * h, batch).vector
                    - batch_gradient(params - direction * h, batch).vector) / (2 * h)
        analytic = hessian_vector_product(params, batch, direction).vector
        self.assertLess(relative_error(analytic, estimate), 1e-6)

    def test_tanh(self):
        self.check_against_gradient_differences('tanh', seed=0)

    def test_relu(self):
        self.check_against_gradient_differences('relu', seed=7)

    def test_symmetry(self):
        config = NetworkConfig(layer_sizes=(5, 4, 3, 3), activation='tanh')
        rng = np.random.default_rng(3)
        params = ModelParams(config, rng.normal(0, 0.5, config.n_params))
        batch = random_batch(rng, 5, 4)
        u = GradientVector(config, rng.normal(size=config.n_params))
        v = GradientVector(config, rng.normal(size=config.n_params))
        self.assertAlmostEqual(u.dot(hessian_vector_product(params, batch, v)),
                               v.dot(hessian_vector_product(params, batch, u)), places=10)


class FiniteDifferenceTests(SimpleTestCase):
    def test_exact_on_quadratic(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(6, 6))
        a = a @ a.T
        b = rng.normal(size=6)
        v = rng.normal(size=6)
        for h in (1e-3, 0.1, 1.0):
            assert_allclose(central_difference(lambda x: 0.5 * x @ a @ x + b @ x, v, h), a @ v + b,
                            rtol=1e-8, atol=1e-8)

    def test_step_must_be_positive(self):
        with self.assertRaises(OracleError):
            fd_gradient(ModelParams.zeros(TINY), random_batch(np.random.default_rng(0), 4, 2), 0.0)

    def test_coordinate_subset(self):
        rng = np.random.default_rng(4)
        params = init_params(TINY, seed=4)
        batch = random_batch(rng, 4, 3)
        coords = [0, 5, TINY.n_params - 1]
        estimate = fd_gradient(params, batch, 1e-5, coordinates=coords)
        self.assertEqual(estimate.shape, (3,))
        self.assertLess(relative_error(batch_gradient(params, batch).vector[coords], estimate), 1e-6)


class AdamTests(SimpleTestCase):
    def test_first_step_magnitude(self):
        params = init_params(TINY, seed=0)
        grad = GradientVector(TINY, np.random.default_rng(0).choice([-1, 1], TINY.n_params)
                              * np.random.default_rng(1).uniform(1e-3, 10, TINY.n_params))
        lr = 0.01
        updated, state = adam_step(AdamState.zeros_like(params), params, grad, lr)
        step = updated.vector - params.vector
        self.assertTrue(np.all(np.sign(step) == -np.sign(grad.vector)))
        self.assertTrue(np.all(np.abs(step) <= lr * (1 + 1e-12)))
        self.assertTrue(np.all(np.abs(step) >= lr * (1 - 1e-4)))
        self.assertEqual(state.t, 1)

    def test_zero_gradient_is_fixed_point(self):
        params = init_params(TINY, seed=0)
        state = AdamState.zeros_like(params)
        current = params
        for _ in range(5):
            current, state = adam_step(state, current, GradientVector.zeros(TINY), 0.1)
        assert_array_equal(current.vector, params.vector)

    def test_deterministic_trajectory(self):
        def run():
            rng = np.random.default_rng(9)
            params = init_params(TINY, seed=9)
            batch = random_batch(rng, 4, 8)
            state = AdamState.zeros_like(params)
            for _ in range(4):
                params, state = adam_step(state, params, batch_gradient(params, batch), 0.01)
            return params.vector
        assert_array_equal(run(), run())

    def test_shape_mismatch(self):
        params = init_params(TINY, seed=0)
        other = NetworkConfig(layer_sizes=(4, 3))
        with self.assertRaises(ShapeError):
            adam_step(AdamState.zeros_like(params), params, GradientVector.zeros(other), 0.1)


class CheckpointTests(SimpleTestCase):
    def test_round_trip_is_exact(self):
        params = init_params(NetworkConfig(layer_sizes=(16, 8, 3), activation='tanh'), seed=2)
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(params, Path(tmp) / 'theta.ckpt', extra={'method': 'metaemg'})
            loaded, extra = load_checkpoint(path)
        self.assertEqual(loaded.config, params.config)
        assert_array_equal(loaded.vector, params.vector)
        self.assertEqual(extra, {'method': 'metaemg'})

    def test_missing_file_names_path(self):
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint('/nonexistent/theta.ckpt')
        self.assertEqual(ctx.exception.code, 'missing')
        self.assertIn('/nonexistent/theta.ckpt', ctx.exception.message)
