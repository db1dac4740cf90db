import filecmp
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from dataio.recordings import parse_recording
from dataio.types import Condition, Intent

from .generator import cue_script, generate_corpus, generate_recording, plan_corpus, write_corpus
from .profiles import CorpusConfig, SessionShift, SubjectProfile, sample_profile, stream


def quiet_profile(noise=0.0):
    return SubjectProfile(
        subject_id='S1',
        mean_activation=np.array([
            [50.0] * 8,
            [300.0] * 4 + [80.0] * 4,
            [90.0] * 4 + [320.0] * 4,
        ]),
        tonic_level=np.full(8, 30.0),
        noise_std=np.full(8, noise),
        spasticity_burst_rate=0.0,
    )


class GenerateRecordingTests(SimpleTestCase):
    def setUp(self):
        self.profile = sample_profile('S1', stream(3, 0, 0))

    def test_same_seed_gives_identical_recordings(self):
        a = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_ON, seed=7)
        b = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_ON, seed=7)
        assert_array_equal(a.channels, b.channels)
        assert_array_equal(a.cues, b.cues)

    def test_different_seeds_differ(self):
        a = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=1)
        b = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=2)
        self.assertFalse(np.array_equal(a.channels, b.channels))

    def test_noiseless_identity_shift_reproduces_means(self):
        profile = quiet_profile()
        config = CorpusConfig()
        rec = generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=7, config=config)

        lag = 30
        intent = np.concatenate([np.zeros(lag, dtype=np.int64), rec.cues[:-lag].astype(np.int64)])
        expected = np.clip(profile.mean_activation[intent] + profile.tonic_level, 0, 1000)
        assert_array_equal(rec.channels, expected)

    def test_length_and_cue_runs(self):
        rec = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_OFF_MOTOR_ON, seed=1)
        self.assertEqual(rec.n_samples, 6500)
        self.assertEqual(rec.sample_rate_hz, 100)
        runs = rec.runs()
        self.assertEqual(len(runs), 13)
        self.assertTrue(all(stop - start + 1 == 500 for _, start, stop in runs))
        self.assertTrue(rec.has_three_motions())

    def test_values_stay_in_sensor_range(self):
        rec = generate_recording(self.profile, SessionShift.identity(), Condition.ARM_OFF_MOTOR_OFF, seed=4)
        self.assertGreaterEqual(rec.channels.min(), 0.0)
        self.assertLessEqual(rec.channels.max(), 1000.0)

    def test_motor_on_reduces_flexor_activation_while_opening(self):
        profile = quiet_profile()
        off = generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=1)
        on = generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_ON, seed=1)
        lagged = np.concatenate([np.zeros(30, dtype=np.int8), off.cues[:-30]])
        opening = np.flatnonzero(lagged == Intent.OPEN)
        self.assertTrue(np.all(on.channels[opening][:, 4:] < off.channels[opening][:, 4:]))
        assert_array_equal(on.channels[opening][:, :4], off.channels[opening][:, :4])

    def test_noiseless_samples_are_linearly_separable(self):
        profile = quiet_profile()
        config = CorpusConfig(latency_ms=0.0)
        rec = generate_recording(profile, SessionShift.identity(), Condition.ARM_ON_MOTOR_OFF, seed=1, config=config)

        features = np.hstack([rec.channels, np.ones((rec.n_samples, 1))])
        targets = np.eye(3)[rec.cues.astype(np.int64)]
        weights, *_ = np.linalg.lstsq(features, targets, rcond=None)
        predicted = np.argmax(features @ weights, axis=1)
        self.assertEqual(np.mean(predicted == rec.cues), 1.0)


class ProfileTests(SimpleTestCase):
    def test_inseparable_profile_is_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            SubjectProfile(
                subject_id='S1',
                mean_activation=np.full((3, 8), 100.0),
                tonic_level=np.zeros(8),
                noise_std=np.ones(8),
            )
        self.assertEqual(ctx.exception.code, 'separability')

    def test_means_must_fit_sensor_range(self):
        with self.assertRaises(ValidationError):
            SubjectProfile(
                subject_id='S1',
                mean_activation=quiet_profile().mean_activation,
                tonic_level=np.full(8, 900.0),
                noise_std=np.ones(8),
            )

    def test_gain_must_be_positive(self):
        with self.assertRaises(ValidationError):
            SessionShift(gain_drift=np.zeros(8))

    def test_fractional_rotation_mixes_neighbours(self):
        values = np.arange(8, dtype=np.float64)[None, :]
        shifted = SessionShift(channel_permutation_angle=0.5).apply(values)
        assert_array_equal(shifted[0], 0.5 * np.roll(values[0], 0) + 0.5 * np.roll(values[0], 1))

    def test_sampled_profiles_are_valid(self):
        for s in range(20):
            profile = sample_profile(f'S{s}', stream(11, s, 0))
            self.assertEqual(profile.mean_activation.shape, (3, 8))


class CorpusTests(SimpleTestCase):
    def test_five_subjects_give_seventy_recordings(self):
        plans = plan_corpus(5, seed=1)
        self.assertEqual(len(plans), 70)
        self.assertEqual(len({plan.recording_id for plan in plans}), 70)

    def test_one_subject_layout(self):
        corpus = generate_corpus(1, seed=1)
        self.assertEqual(len(corpus), 14)
        self.assertEqual(sum(rec.day == 1 for rec in corpus), 8)
        day1 = [rec.condition for rec in corpus if rec.day == 1]
        for condition in Condition:
            self.assertEqual(day1.count(condition), 2)
        self.assertTrue(all(rec.has_three_motions() for rec in corpus))

    def test_same_seed_gives_identical_corpus(self):
        a = generate_corpus(2, seed=5)
        b = generate_corpus(2, seed=5, workers=3)
        for rec_a, rec_b in zip(a, b):
            self.assertEqual(rec_a.recording_id, rec_b.recording_id)
            assert_array_equal(rec_a.channels, rec_b.channels)

    def test_day_two_means_shift_by_tone_drift(self):
        config = CorpusConfig(
            rotation_std=0.0, gain_std=0.0, tone_drift_std=10.0,
            noise_range=(5.0, 10.0), burst_rate_range=(0.0, 0.0),
        )
        plans = plan_corpus(1, seed=9, config=config)
        pick = {(p.day, p.repetition): p for p in plans if p.condition == Condition.ARM_ON_MOTOR_OFF}
        tone_drift = pick[(2, 0)].shift.tone_drift

        diffs = np.vstack([
            pick[(2, rep)].generate(config).channels - pick[(1, rep)].generate(config).channels
            for rep in (0, 1)
        ])
        mean = diffs.mean(axis=0)
        stderr = diffs.std(axis=0, ddof=1) / np.sqrt(diffs.shape[0])
        self.assertTrue(np.all(np.abs(mean - tone_drift) <= 3 * stderr + 1e-9))

    def test_written_corpus_is_byte_identical_and_parseable(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            manifest = write_corpus(first, 1, seed=1)
            write_corpus(second, 1, seed=1)

            names = sorted(p.name for p in Path(first).iterdir())
            self.assertEqual(names, sorted(p.name for p in Path(second).iterdir()))
            _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
            self.assertEqual((mismatch, errors), ([], []))

            self.assertEqual(len(manifest['recordings']), 14)
            entry = manifest['recordings'][0]
            rec = parse_recording(Path(first) / entry['path'])
            self.assertEqual(rec.recording_id, entry['recording_id'])
            assert_array_equal(rec.cues, cue_script())
