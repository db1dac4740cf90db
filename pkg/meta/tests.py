import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from dataio.types import Condition, WindowConfig
from nn.gradcheck import random_batch
from nn.network import batch_gradient, batch_loss, init_params
from nn.params import ModelParams, NetworkConfig
from synth.generator import generate_corpus, generate_recording
from synth.profiles import SessionShift, sample_profile, stream
from tasks.splits import Scenario, build_scenario, split_task

from .config import InnerRule, MetaConfig, MetaGradientKind, OuterRule
from .exceptions import MetaConfigurationError
from .learning import ArrayTask, TrainLog, inner_adapt, meta_gradient, meta_train
from .oracles import closed_form_suite, meta_gradient_suite
from .training import conventional_pretrain, fine_tune, pooled_windows

TINY = NetworkConfig(layer_sizes=(6, 5, 4, 3), activation='tanh')
COARSE = WindowConfig(stride_ms=500)


def tiny_theta(seed=0):
    return ModelParams(TINY, np.random.default_rng(seed).normal(0, 0.5, TINY.n_params))


def tiny_task(seed=0, task_id=''):
    rng = np.random.default_rng(seed + 100)
    return ArrayTask(random_batch(rng, 6, 8), random_batch(rng, 6, 8), task_id)


def synthetic_task(seed=1, day=1):
    profile = sample_profile('S1', stream(seed, 0, 0))
    rec = generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=seed, day=day,
                             recording_id=f'S1_d{day}_on_off_r{seed}', repetition=seed)
    return split_task(rec, COARSE)


class MetaConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = MetaConfig()
        self.assertEqual((config.alpha, config.beta, config.inner_steps, config.outer_epochs), (1e-4, 5e-4, 5, 50))
        self.assertEqual(config.inner_rule, InnerRule.SGD)
        self.assertEqual(config.meta_gradient, MetaGradientKind.SECOND_ORDER)

    def test_schedule(self):
        config = MetaConfig()
        self.assertAlmostEqual(config.beta_at(25), 0.000405, places=15)
        self.assertEqual(config.beta_at(9), 5e-4)

    def test_second_order_requires_sgd_inner_rule(self):
        with self.assertRaises(MetaConfigurationError) as ctx:
            MetaConfig(inner_rule=InnerRule.ADAM)
        self.assertEqual(ctx.exception.code, 'inner_rule')
        MetaConfig(inner_rule=InnerRule.ADAM, meta_gradient=MetaGradientKind.FIRST_ORDER)

    def test_invalid_values(self):
        for kwargs in ({'beta': 0}, {'alpha': -1}, {'inner_steps': -1}, {'outer_epochs': 0}, {'reduction': 'max'}):
            with self.assertRaises(MetaConfigurationError):
                MetaConfig(**kwargs)

    def test_dict_round_trip(self):
        config = MetaConfig(alpha=0.01, outer_rule='sgd')
        self.assertEqual(config.to_dict()['outer_rule'], 'sgd')
        self.assertEqual(MetaConfig.from_dict(config.to_dict()), config)


class InnerAdaptTests(SimpleTestCase):
    def test_zero_steps(self):
        theta = tiny_theta()
        self.assertIs(inner_adapt(theta, tiny_task().support, 0.1, 0), theta)

    def test_one_step_closed_form(self):
        theta, task = tiny_theta(1), tiny_task(1)
        expected = theta - batch_gradient(theta, task.support) * 0.1
        assert_array_equal(inner_adapt(theta, task.support, 0.1, 1).vector, expected.vector)

    def test_zero_alpha(self):
        theta = tiny_theta(2)
        assert_array_equal(inner_adapt(theta, tiny_task(2).support, 0.0, 4).vector, theta.vector)

    def test_input_is_not_mutated(self):
        theta = tiny_theta(3)
        before = theta.flatten()
        inner_adapt(theta, tiny_task(3).support, 0.5, 3)
        assert_array_equal(theta.vector, before)

    def test_empty_support(self):
        with self.assertRaises(MetaConfigurationError):
            inner_adapt(tiny_theta(), (np.zeros((0, 6)), []), 0.1, 1)

    def test_adam_rule(self):
        theta, task = tiny_theta(4), tiny_task(4)
        adapted = inner_adapt(theta, task.support, 0.01, 3, InnerRule.ADAM)
        self.assertLess(batch_loss(adapted, task.support), batch_loss(theta, task.support))


class MetaGradientTests(SimpleTestCase):
    def test_no_inner_steps_gives_query_gradient(self):
        theta, task = tiny_theta(5), tiny_task(5)
        expected = batch_gradient(theta, task.query).vector
        for kind in MetaGradientKind:
            config = MetaConfig(alpha=0.1, inner_steps=0, meta_gradient=kind)
            assert_array_equal(meta_gradient(theta, task, config).vector, expected)

    def test_zero_alpha_gives_query_gradient(self):
        theta, task = tiny_theta(6), tiny_task(6)
        expected = batch_gradient(theta, task.query).vector
        for kind in MetaGradientKind:
            config = MetaConfig(alpha=0.0, inner_steps=3, meta_gradient=kind)
            assert_array_equal(meta_gradient(theta, task, config).vector, expected)

    def test_first_order_is_query_gradient_at_adapted_params(self):
        theta, task = tiny_theta(7), tiny_task(7)
        config = MetaConfig(alpha=0.1, inner_steps=2, meta_gradient=MetaGradientKind.FIRST_ORDER)
        adapted = inner_adapt(theta, task.support, 0.1, 2)
        assert_array_equal(meta_gradient(theta, task, config).vector, batch_gradient(adapted, task.query).vector)

    def test_second_order_differs_from_first_order(self):
        theta, task = tiny_theta(8), tiny_task(8)
        second = meta_gradient(theta, task, MetaConfig(alpha=0.3, inner_steps=2))
        first = meta_gradient(theta, task, MetaConfig(alpha=0.3, inner_steps=2,
                                                      meta_gradient=MetaGradientKind.FIRST_ORDER))
        self.assertGreater((second - first).norm(), 1e-8)

    def test_finite_difference_oracle(self):
        report = meta_gradient_suite(trials=4, n_coordinates=30, seed=2)
        self.assertTrue(report.passed, report.to_dict())

    def test_one_step_closed_form(self):
        report = closed_form_suite(trials=2, seed=3)
        self.assertTrue(report.passed, report.to_dict())


class MetaTrainTests(SimpleTestCase):
    def test_single_supervised_step(self):
        theta, task = tiny_theta(9), tiny_task(9)
        config = MetaConfig(inner_steps=0, outer_epochs=1, outer_rule=OuterRule.SGD)
        trained, log = meta_train([task], config, theta=theta)
        expected = theta - batch_gradient(theta, task.query) * config.beta
        assert_array_equal(trained.vector, expected.vector)
        self.assertEqual(len(log.entries), 1)

    def test_schedule_recorded_in_log(self):
        config = MetaConfig(alpha=0.05, inner_steps=1, outer_epochs=26)
        _, log = meta_train([tiny_task(10)], config, theta=tiny_theta(10))
        self.assertEqual(len(log.entries), 26)
        for entry in log.entries:
            self.assertAlmostEqual(entry.beta, 5e-4 * 0.9 ** (entry.epoch // 10), places=15)
        self.assertAlmostEqual(log.entries[25].beta, 0.000405, places=15)

    def test_deterministic_and_order_independent(self):
        tasks = [tiny_task(i, task_id=f't{i}') for i in range(4)]
        config = MetaConfig(alpha=0.05, inner_steps=2, outer_epochs=3)
        a, _ = meta_train(tasks, config, theta=tiny_theta(11))
        b, _ = meta_train(list(reversed(tasks)), config, theta=tiny_theta(11))
        c, _ = meta_train(tasks, MetaConfig(alpha=0.05, inner_steps=2, outer_epochs=3, workers=3),
                          theta=tiny_theta(11))
        assert_array_equal(a.vector, b.vector)
        assert_array_equal(a.vector, c.vector)

    def test_default_init_uses_seed(self):
        tasks = [synthetic_task(1)]
        config = MetaConfig(inner_steps=1, outer_epochs=1, seed=4)
        trained, log = meta_train(tasks, config)
        self.assertEqual(trained.config, NetworkConfig.for_windows(200))
        self.assertEqual(log.seed, 4)
        again, _ = meta_train(tasks, config, theta=init_params(NetworkConfig.for_windows(200), seed=4))
        assert_array_equal(trained.vector, again.vector)

    def test_empty_tasks(self):
        with self.assertRaises(MetaConfigurationError):
            meta_train([], MetaConfig())

    def test_log_round_trip(self):
        _, log = meta_train([tiny_task(12)], MetaConfig(alpha=0.05, inner_steps=1, outer_epochs=2, seed=7),
                            theta=tiny_theta(12))
        with tempfile.TemporaryDirectory() as tmp:
            path = log.to_jsonl(Path(tmp) / 'train.jsonl')
            self.assertEqual(len(path.read_text().splitlines()), 2)
            loaded = TrainLog.from_jsonl(path)
        self.assertEqual(loaded.seed, 7)
        self.assertEqual(loaded.entries, log.entries)


class FineTuneTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.task = synthetic_task(2)

    def test_zero_learning_rate_is_identity(self):
        theta = tiny_theta(13)
        assert_array_equal(fine_tune(theta, tiny_task(13).support, 3, lr=0.0).vector, theta.vector)

    def test_single_full_batch_sgd_step(self):
        theta, task = tiny_theta(14), tiny_task(14)
        tuned = fine_tune(theta, task.support, 1, lr=0.2, batch_size=None, rule=InnerRule.SGD)
        assert_array_equal(tuned.vector, (theta - batch_gradient(theta, task.support) * 0.2).vector)

    def test_support_loss_decreases_on_average(self):
        network = NetworkConfig.for_windows(200)
        before, after = [], []
        for seed in range(5):
            theta = init_params(network, seed=seed)
            before.append(batch_loss(theta, self.task.support))
            after.append(batch_loss(fine_tune(theta, self.task.support, 3, seed=seed), self.task.support))
        self.assertLess(np.mean(after), np.mean(before))

    def test_invalid_arguments(self):
        theta = tiny_theta()
        with self.assertRaises(MetaConfigurationError):
            fine_tune(theta, tiny_task().support, 0)
        with self.assertRaises(MetaConfigurationError):
            fine_tune(theta, (np.zeros((0, 6)), []), 1)


class ConventionalPretrainTests(SimpleTestCase):
    def test_pooled_size(self):
        tasks = [split_task(rec, COARSE) for rec in generate_corpus(5, seed=3)]
        split = build_scenario(tasks, Scenario.SESSION)
        self.assertEqual(len(split.meta_train), 40)
        self.assertEqual(len(pooled_windows(split.meta_train)),
                         sum(len(t.support) + len(t.query) for t in split.meta_train))

    def test_equivalent_to_fine_tune_on_all_windows(self):
        task = synthetic_task(3)
        theta = init_params(NetworkConfig.for_windows(200), seed=1)
        pretrained = conventional_pretrain([task], epochs=1, lr=0.01, batch_size=None, theta=theta,
                                           rule=InnerRule.SGD)
        tuned = fine_tune(theta, task.all_windows(), 1, lr=0.01, batch_size=None, rule=InnerRule.SGD)
        assert_array_equal(pretrained.vector, tuned.vector)

    def test_same_seed_same_params(self):
        tasks = [synthetic_task(4), synthetic_task(5, day=2)]
        a = conventional_pretrain(tasks, epochs=1, seed=6)
        b = conventional_pretrain(tasks, epochs=1, seed=6)
        assert_array_equal(a.vector, b.vector)
