import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from .containers import read_arrays, write_arrays
from .exceptions import PreconditionError, RecordingParseError, WindowingError
from .preprocessing import clip_channels, preprocess, rescale_channels, window, window_count
from .recordings import parse_recording, write_recording
from .types import Condition, Intent, IntentDistribution, RawRecording, WindowBatch, WindowConfig, cue_runs

SCRIPT = [Intent.RELAX] + [Intent.OPEN, Intent.RELAX, Intent.CLOSE, Intent.RELAX] * 3


def make_cues(run_lengths):
    return np.concatenate([np.full(n, int(intent), dtype=np.int8) for intent, n in zip(SCRIPT, run_lengths)])


def make_recording(n_samples=4500, seed=0, low=-50.0, high=1200.0, **kwargs):
    base = n_samples // len(SCRIPT)
    lengths = [base] * len(SCRIPT)
    lengths[-1] += n_samples - base * len(SCRIPT)
    rng = np.random.default_rng(seed)
    defaults = dict(
        subject_id='S1',
        day=1,
        condition=Condition.ARM_ON_MOTOR_OFF,
        sample_rate_hz=100,
        channels=rng.uniform(low, high, size=(n_samples, 8)),
        cues=make_cues(lengths),
    )
    defaults.update(kwargs)
    return RawRecording(**defaults)


class RecordingFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def _write_lines(self, name, lines):
        path = self.dir / name
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return path

    def test_parse_well_formed_file(self):
        rec = make_recording(4500)
        path = write_recording(rec, self.dir / 'S1_d1_on_off_r1.csv')
        parsed = parse_recording(path)

        self.assertEqual(parsed.n_samples, 4500)
        self.assertEqual(parsed.subject_id, 'S1')
        self.assertEqual(parsed.condition, Condition.ARM_ON_MOTOR_OFF)
        self.assertEqual(parsed.repetition, 1)
        assert_array_equal(parsed.channels, rec.channels)
        assert_array_equal(parsed.cues, rec.cues)

    def test_unknown_cue_token_names_token_and_line(self):
        path = write_recording(make_recording(300), self.dir / 'rec.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        lines[9] = lines[9].rsplit(',', 1)[0] + ',grip'
        bad = self._write_lines('bad.csv', lines)

        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.code, 'cue')
        self.assertEqual(ctx.exception.line, 10)
        self.assertIn('grip', ctx.exception.message)

    def test_seven_channel_header_is_rejected(self):
        bad = self._write_lines('bad.csv', [
            'subject,day,condition,rate_hz',
            'S1,1,on_off,100',
            'e1,e2,e3,e4,e5,e6,e7,cue',
            '1,2,3,4,5,6,7,relax',
        ])
        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.code, 'channels')
        self.assertIn('se esperaban 8 canales', ctx.exception.message)

    def test_short_row_reports_line(self):
        path = write_recording(make_recording(300), self.dir / 'rec.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        fields = lines[20].split(',')
        lines[20] = ','.join(fields[:7] + fields[8:])
        bad = self._write_lines('bad.csv', lines)

        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.code, 'channels')
        self.assertEqual(ctx.exception.line, 21)

    def test_two_motions_violate_structure(self):
        rec = make_recording(300)
        cues = rec.cues.copy()
        cues[cues == Intent.CLOSE] = Intent.RELAX
        cues[200:210] = Intent.CLOSE
        cues[100:110] = Intent.CLOSE
        path = write_recording(make_recording(300, cues=cues), self.dir / 'rec.csv')

        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(path)
        self.assertEqual(ctx.exception.code, 'structure')

    def test_bad_metadata_header(self):
        bad = self._write_lines('bad.csv', ['subject,day', 'S1,1'])
        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.line, 1)

    def test_non_numeric_value_reports_first_bad_row(self):
        path = write_recording(make_recording(300), self.dir / 'rec.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        for index, token in ((30, 'nan'), (15, 'abc')):
            fields = lines[index].split(',')
            fields[2] = token
            lines[index] = ','.join(fields)
        bad = self._write_lines('bad.csv', lines)

        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.code, 'value')
        self.assertEqual(ctx.exception.line, 16)
        self.assertIn('abc', ctx.exception.message)

    def test_extra_column_reports_line(self):
        path = write_recording(make_recording(300), self.dir / 'rec.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        lines[40] = lines[40] + ',1.0'
        bad = self._write_lines('bad.csv', lines)

        with self.assertRaises(RecordingParseError) as ctx:
            parse_recording(bad)
        self.assertEqual(ctx.exception.code, 'channels')
        self.assertEqual(ctx.exception.line, 41)

    def test_written_body_keeps_schema_header_and_float_precision(self):
        rec = make_recording(300, seed=3)
        path = write_recording(rec, self.dir / 'rec.csv')
        lines = path.read_text(encoding='utf-8').splitlines()

        self.assertEqual(lines[:3], ['subject,day,condition,rate_hz', 'S1,1,on_off,100', 'e1,e2,e3,e4,e5,e6,e7,e8,cue'])
        self.assertEqual(len(lines), 303)
        self.assertEqual(float(lines[3].split(',')[0]), rec.channels[0, 0])
        self.assertEqual(write_recording(rec, self.dir / 'again.csv').read_bytes(), path.read_bytes())


class ArrayContainerTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        rng = np.random.default_rng(9)
        self.arrays = {
            'theta': rng.normal(size=37),
            'labels': rng.integers(0, 3, size=(4, 5)).astype(np.int8),
            'strided': rng.normal(size=(6, 8))[::2, 1:5],
        }

    def test_round_trip_keeps_dtype_shape_and_values(self):
        path = write_arrays(self.dir / 'a.bin', {'kind': 'test', 'n': 3}, self.arrays)
        meta, arrays = read_arrays(path)

        self.assertEqual(meta, {'kind': 'test', 'n': 3})
        self.assertEqual(list(arrays), ['theta', 'labels', 'strided'])
        for name, expected in self.arrays.items():
            self.assertEqual(arrays[name].dtype, expected.dtype)
            assert_array_equal(arrays[name], expected)

    def test_identical_content_writes_identical_bytes(self):
        first = write_arrays(self.dir / 'a.bin', {'kind': 'test'}, self.arrays)
        second = write_arrays(self.dir / 'b.bin', {'kind': 'test'}, dict(self.arrays))
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_rejects_foreign_file_and_other_version(self):
        foreign = self.dir / 'foreign.bin'
        foreign.write_bytes(b'not a container\n')
        with self.assertRaises(PreconditionError) as ctx:
            read_arrays(foreign)
        self.assertEqual(ctx.exception.code, 'format')

        path = write_arrays(self.dir / 'a.bin', {}, self.arrays)
        old = self.dir / 'old.bin'
        old.write_bytes(path.read_bytes().replace(b'METAEMG-ARRAYS 2', b'METAEMG-ARRAYS 1', 1))
        with self.assertRaises(PreconditionError) as ctx:
            read_arrays(old)
        self.assertEqual(ctx.exception.code, 'version')

    def test_truncated_payload_is_a_format_error(self):
        path = write_arrays(self.dir / 'a.bin', {}, self.arrays)
        path.write_bytes(path.read_bytes()[:-40])
        with self.assertRaises(PreconditionError) as ctx:
            read_arrays(path)
        self.assertEqual(ctx.exception.code, 'format')


class ClipRescaleTests(SimpleTestCase):
    def test_clip_bounds(self):
        rec = make_recording(300)
        channels = rec.channels.copy()
        channels[0, :3] = [1500.0, 500.0, -3.0]
        clipped = clip_channels(make_recording(300, channels=channels))

        assert_array_equal(clipped.channels[0, :3], [1000.0, 500.0, 0.0])
        self.assertEqual(clipped.subject_id, rec.subject_id)
        assert_array_equal(clipped.cues, rec.cues)

    def test_clip_is_idempotent(self):
        once = clip_channels(make_recording(500))
        twice = clip_channels(once)
        assert_array_equal(once.channels, twice.channels)

    def test_rescale_endpoints(self):
        rec = make_recording(300, low=0.0, high=1000.0)
        channels = rec.channels.copy()
        channels[0, :3] = [0.0, 1000.0, 500.0]
        scaled = rescale_channels(make_recording(300, channels=channels))
        assert_array_equal(scaled.channels[0, :3], [-1.0, 1.0, 0.0])

    def test_rescale_requires_clipped_input(self):
        with self.assertRaises(PreconditionError):
            rescale_channels(make_recording(300, low=-10.0))

    def test_rescale_preserves_order_within_channel(self):
        rec = clip_channels(make_recording(800, seed=3))
        scaled = rescale_channels(rec)
        for c in range(8):
            order = np.argsort(rec.channels[:, c], kind="stable")
            self.assertTrue(np.all(np.diff(scaled.channels[order, c]) >= 0))

    def test_minmax_mode_spans_unit_interval(self):
        scaled = rescale_channels(clip_channels(make_recording(600, seed=4)), mode='minmax')
        assert_array_equal(scaled.channels.min(axis=0), -np.ones(8))
        assert_array_equal(scaled.channels.max(axis=0), np.ones(8))


class WindowTests(SimpleTestCase):
    def _prepared(self, n_samples, seed=0):
        return rescale_channels(clip_channels(make_recording(n_samples, seed=seed)))

    def test_count_for_4500_samples(self):
        self.assertEqual(len(window(self._prepared(4500))), 4301)

    def test_minimal_recording_gives_one_window(self):
        rec = self._prepared(200)
        batch = window(rec)
        self.assertEqual(len(batch), 1)
        self.assertEqual(batch[0].t_end, 199)
        self.assertEqual(batch[0].label, Intent(int(rec.cues[199])))
        self.assertEqual(batch[0].x.shape, (8, 200))

    def test_too_short_recording_is_an_error(self):
        with self.assertRaises(WindowingError):
            window(self._prepared(199))

    def test_non_integer_stride_is_a_configuration_error(self):
        with self.assertRaises(WindowingError) as ctx:
            window(self._prepared(400), stride_ms=15)
        self.assertEqual(ctx.exception.code, 'config')

    def test_requires_rescaled_input(self):
        with self.assertRaises(PreconditionError):
            window(clip_channels(make_recording(400)))

    def test_count_formula_matches_enumeration(self):
        rec = self._prepared(1200)
        for n in range(200, 1201):
            for stride in (1, 3):
                expected = len(range(199, n, stride))
                self.assertEqual(window_count(n, 200, stride), expected)
        for n in (200, 201, 457, 1000, 1200):
            short = RawRecording(**{**_fields(rec), 'channels': rec.channels[:n], 'cues': rec.cues[:n]})
            self.assertEqual(len(window(short, stride_ms=30)), window_count(n, 200, 3))

    def test_final_columns_reproduce_signal(self):
        rec = self._prepared(900, seed=5)
        batch = window(rec)
        last_columns = np.stack([sample.x[:, -1] for sample in batch], axis=1)
        assert_array_equal(last_columns, rec.channels[199:].T)

    def test_label_provenance(self):
        rec = self._prepared(2000, seed=6)
        batch = window(rec, stride_ms=20)
        for sample in batch:
            self.assertEqual(sample.label, rec.cues[sample.t_end])

    def test_inputs_are_channel_major(self):
        rec = self._prepared(260, seed=7)
        batch = window(rec, stride_ms=30)
        inputs = batch.inputs()
        self.assertEqual(inputs.shape, (len(batch), 1600))
        for i, sample in enumerate(batch):
            assert_array_equal(inputs[i], sample.flatten())
            assert_array_equal(inputs[i, :200], sample.x[0])

    def test_concatenated_batches_keep_their_signals(self):
        a = window(self._prepared(300, seed=1))
        b = window(self._prepared(350, seed=2))
        both = WindowBatch.concatenate([a, b])
        self.assertEqual(len(both), len(a) + len(b))
        assert_array_equal(both.inputs(), np.vstack([a.inputs(), b.inputs()]))

    def test_preprocess_chain(self):
        batch = preprocess(make_recording(600), WindowConfig(stride_ms=100))
        self.assertEqual(len(batch), window_count(600, 200, 10))
        self.assertTrue(np.all(np.abs(batch.inputs()) <= 1.0))


class TypeTests(SimpleTestCase):
    def test_cue_runs(self):
        runs = cue_runs([0, 0, 1, 1, 1, 0, 2])
        self.assertEqual(runs, [(Intent.RELAX, 0, 1), (Intent.OPEN, 2, 4), (Intent.RELAX, 5, 5), (Intent.CLOSE, 6, 6)])

    def test_recording_requires_eight_channels(self):
        with self.assertRaises(PreconditionError):
            make_recording(300, channels=np.zeros((300, 7)))

    def test_intent_distribution_must_sum_to_one(self):
        self.assertEqual(IntentDistribution(0.1, 0.2, 0.7).most_likely(), Intent.CLOSE)
        with self.assertRaises(PreconditionError):
            IntentDistribution(0.5, 0.5, 0.5)


def _fields(rec):
    return {
        'subject_id': rec.subject_id,
        'day': rec.day,
        'condition': rec.condition,
        'sample_rate_hz': rec.sample_rate_hz,
        'channels': rec.channels,
        'cues': rec.cues,
    }
