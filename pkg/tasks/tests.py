import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from dataio.types import Condition, Intent, RawRecording, WindowConfig
from synth.generator import generate_corpus, generate_recording
from synth.profiles import SessionShift, sample_profile, stream

from .exceptions import ScenarioError, TaskStructureError
from .splits import Scenario, build_scenario, downsample_support, split_task
from .storage import load_task, save_task

COARSE = WindowConfig(stride_ms=500)


def synthetic_recording(seed=1):
    profile = sample_profile('S1', stream(seed, 0, 0))
    return generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=seed,
                              recording_id='S1_d1_on_off_r0')


class SplitTaskTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rec = synthetic_recording()
        cls.task = split_task(cls.rec)

    def test_boundary_and_counts(self):
        task = self.task
        self.assertEqual(task.boundary_k, 2499)
        self.assertEqual(task.n, 6499)
        self.assertEqual(len(task.support), 2301)
        self.assertEqual((task.support.t_end.min(), task.support.t_end.max()), (199, 2499))
        self.assertEqual(len(task.query), 4000)
        self.assertEqual((task.query.t_end.min(), task.query.t_end.max()), (2500, 6499))

    def test_boundary_sits_before_second_open(self):
        k = self.task.boundary_k
        self.assertEqual(self.rec.cues[k], Intent.RELAX)
        self.assertEqual(self.rec.cues[k + 1], Intent.OPEN)

    def test_support_and_query_partition_the_windows(self):
        support = set(self.task.support.t_end.tolist())
        query = set(self.task.query.t_end.tolist())
        self.assertFalse(support & query)
        self.assertEqual(len(support) + len(query), 6500 - 200 + 1)
        self.assertEqual(support | query, set(range(199, 6500)))

    def test_missing_motion_is_a_structure_error(self):
        cues = self.rec.cues.copy()
        last_close = np.flatnonzero(cues == Intent.CLOSE)[-500:]
        cues[last_close] = Intent.RELAX
        rec = RawRecording(
            subject_id='S1', day=1, condition=Condition.ARM_ON_MOTOR_OFF, sample_rate_hz=100,
            channels=self.rec.channels, cues=cues,
        )
        with self.assertRaises(TaskStructureError) as ctx:
            split_task(rec)
        self.assertEqual(ctx.exception.code, 'structure')

    def test_task_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_task(self.task, Path(tmp) / 'S1.task')
            loaded = load_task(path)
        self.assertEqual(loaded.source, self.task.source)
        self.assertEqual(loaded.boundary_k, self.task.boundary_k)
        assert_array_equal(loaded.query.t_end, self.task.query.t_end)
        assert_array_equal(loaded.support.labels, self.task.support.labels)
        assert_array_equal(loaded.support[:5].inputs(), self.task.support[:5].inputs())


class DownsampleTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.task = split_task(synthetic_recording(seed=2))

    def test_full_fraction_is_identity(self):
        self.assertIs(downsample_support(self.task, 1.0), self.task)

    def test_half_keeps_prefix(self):
        reduced = downsample_support(self.task, 0.5)
        self.assertEqual(len(reduced.support), 1151)
        assert_array_equal(reduced.support.t_end, self.task.support.t_end[:1151])
        self.assertIs(reduced.query, self.task.query)

    def test_prefix_is_deterministic(self):
        a = downsample_support(self.task, 0.25, seed=1)
        b = downsample_support(self.task, 0.25, seed=2)
        assert_array_equal(a.support.t_end, b.support.t_end)
        self.assertEqual(len(a.support), 576)

    def test_random_mode_is_sorted_subset(self):
        reduced = downsample_support(self.task, 0.25, seed=3, mode='random')
        self.assertEqual(len(reduced.support), 576)
        self.assertTrue(np.all(np.diff(reduced.support.t_end) > 0))
        self.assertTrue(set(reduced.support.t_end) <= set(self.task.support.t_end))

    def test_fraction_outside_unit_interval(self):
        for fraction in (0.0, -0.1, 1.5):
            with self.assertRaises(ScenarioError):
                downsample_support(self.task, fraction)


class ScenarioTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tasks = [split_task(rec, COARSE) for rec in generate_corpus(5, seed=3)]

    def test_session_adaptation_counts(self):
        split = build_scenario(self.tasks, Scenario.SESSION)
        self.assertEqual(len(split.meta_train), 40)
        self.assertEqual(len(split.meta_test), 30)
        self.assertTrue(all(t.source.day == 1 for t in split.meta_train))
        self.assertTrue(all(t.source.day == 2 for t in split.meta_test))

    def test_subject_adaptation_holds_out_subject(self):
        split = build_scenario(self.tasks, Scenario.SUBJECT, held_out='S3')
        self.assertEqual(len(split.meta_test), 14)
        self.assertEqual(len(split.meta_train), 56)
        self.assertTrue(all(t.subject_id != 'S3' for t in split.meta_train))
        self.assertTrue(all(t.subject_id == 'S3' for t in split.meta_test))

    def test_absent_subject_is_an_error(self):
        with self.assertRaises(ScenarioError) as ctx:
            build_scenario(self.tasks, Scenario.SUBJECT, held_out='S9')
        self.assertEqual(ctx.exception.code, 'missing')

    def test_held_out_required_only_for_subject_scenario(self):
        with self.assertRaises(ScenarioError):
            build_scenario(self.tasks, Scenario.SUBJECT)
        with self.assertRaises(ScenarioError):
            build_scenario(self.tasks, Scenario.SESSION, held_out='S1')

    def test_split_is_pure_and_ordered(self):
        a = build_scenario(self.tasks, Scenario.SESSION)
        b = build_scenario(list(reversed(self.tasks)), Scenario.SESSION)
        self.assertEqual([t.task_id for t in a.meta_train], [t.task_id for t in b.meta_train])
        sources = [t.source for t in a.meta_test]
        self.assertEqual(sources, sorted(sources))

    def test_manifest_counts(self):
        manifest = build_scenario(self.tasks, Scenario.SUBJECT, held_out='S1').to_manifest()
        self.assertEqual(manifest['counts'], {'meta_train': 56, 'meta_test': 14})
        self.assertEqual(manifest['meta_test'][0]['boundary_k'], 2499)
