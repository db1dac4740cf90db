import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr
from functools import lru_cache
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, TestCase, tag
from numpy.testing import assert_array_equal

from dataio.types import WindowConfig
from manage import main
from meta.config import InnerRule
from meta.training import fine_tune
from metaemg_lab.schema import schema
from nn.network import init_params, predict_labels
from synth.generator import generate_corpus
from tasks.splits import Scenario, build_scenario, split_task

from .ablations import ablate_finetune_epochs, ablate_pretrain_subjects, ablate_support_fraction, pretrain_partitions
from .config import ExperimentConfig, read_config_file
from .evaluation import AVERAGE, ResultTable, TaskRecord, evaluate_method
from .exceptions import ExperimentError
from .filters import ResultCellFilter
from .manifest import directory_hash, run_manifest
from .methods import Method, MethodSpec, NetworkLearner
from .models import ExperimentRun, ResultCell, TaskResult
from .recording import record_run

COARSE = WindowConfig(stride_ms=500)
SMALL = {'window': {'stride_ms': 500}, 'network': {'layer_sizes': [1600, 16, 8, 3]}}


@lru_cache(maxsize=None)
def corpus(n_subjects=3, seed=5):
    return tuple(split_task(rec, COARSE) for rec in generate_corpus(n_subjects, seed=seed))


def session_split():
    return build_scenario(corpus(), Scenario.SESSION)


class OracleLearner:
    """Devuelve las etiquetas verdaderas; cuenta cuántas veces se preentrena."""

    def __init__(self):
        self.pretrained = []

    def pretrain(self, tasks, seed):
        self.pretrained.append((seed, len(tasks)))
        return seed

    def adapt_and_predict(self, base, task, seed, epochs=None):
        return task.query.labels


class RandomLearner:
    def pretrain(self, tasks, seed):
        return seed

    def adapt_and_predict(self, base, task, seed, epochs=None):
        return np.random.default_rng(seed).integers(0, 3, len(task.query))


class MajorityLearner:
    """Predice la clase más frecuente del soporte; anota lo que recibe."""

    def __init__(self):
        self.support_sizes = []
        self.epochs = []

    def pretrain(self, tasks, seed):
        return None

    def adapt_and_predict(self, base, task, seed, epochs=None):
        self.support_sizes.append(len(task.support))
        self.epochs.append(epochs)
        majority = np.bincount(task.support.labels, minlength=3).argmax()
        return np.full(len(task.query), majority)


def record(seed, subject, task, correct, total=2, method='MetaEMG', **tags):
    return TaskRecord(method, seed, task, subject, 2, 'on_off', correct, total, tags)


HAND_RECORDS = [
    record(0, 'S1', 'a', 1), record(0, 'S1', 'b', 2), record(0, 'S2', 'c', 0),
    record(1, 'S1', 'a', 2), record(1, 'S1', 'b', 2), record(1, 'S2', 'c', 1),
]


class ResultTableTests(SimpleTestCase):
    def setUp(self):
        self.table = ResultTable(HAND_RECORDS, Scenario.SESSION, [0, 1])

    def test_subject_rows_then_average(self):
        rows = self.table.rows()
        self.assertEqual(list(rows['subject_id']), ['S1', 'S2', AVERAGE])
        assert_array_equal(rows['accuracy'].to_numpy(), [87.5, 25.0, 56.25])
        assert_array_equal(rows['std_over_seeds'].to_numpy(), [12.5, 25.0, 18.75])
        self.assertEqual(list(rows['n_tasks']), [2, 1, 3])

    def test_cell_lookup(self):
        self.assertEqual(self.table.mean_accuracy('MetaEMG'), 56.25)
        with self.assertRaises(ExperimentError):
            self.table.cell('NoPretrain3')

    def test_average_recomputes_from_subject_means(self):
        rows = self.table.rows().set_index('subject_id')
        per_seed = [np.mean([75.0, 0.0]), np.mean([100.0, 50.0])]
        self.assertEqual(rows.loc[AVERAGE, 'accuracy'], np.mean(per_seed))

    def test_by_condition(self):
        by_condition = self.table.by_condition()
        self.assertEqual(list(by_condition['condition']), ['on_off'])
        self.assertAlmostEqual(by_condition['accuracy'].iloc[0], 100 * 8 / 12)

    def test_ablation_key_groups_rows(self):
        records = [record(0, 'S1', 'a', 2, fraction=0.5), record(0, 'S1', 'a', 0, fraction=1.0)]
        table = ResultTable(records, Scenario.SESSION, [0], keys=['fraction'])
        self.assertEqual(table.mean_accuracy('MetaEMG', fraction=0.5), 100.0)
        self.assertEqual(table.mean_accuracy('MetaEMG', fraction=1.0), 0.0)

    def test_csv_and_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            csv_path, json_path = self.table.write(tmp, 'table')
            lines = csv_path.read_text().splitlines()
            self.assertEqual(lines[0], 'method,subject_id,accuracy,std_over_seeds,n_tasks')
            self.assertEqual(lines[-1], 'MetaEMG,AVG,56.250000,18.750000,3')
            payload = json.loads(json_path.read_text())
            self.assertEqual(payload['seeds'], [0, 1])
            self.assertEqual(payload['scenario'], 'session')
            self.assertEqual(len(payload['records']), 6)

    def test_empty_table_has_columns(self):
        table = ResultTable([], Scenario.SESSION, [0])
        self.assertIn('std_over_seeds', table.rows().columns)


class EvaluateMethodTests(SimpleTestCase):
    def test_oracle_learner_scores_perfectly(self):
        learner = OracleLearner()
        table = evaluate_method(Method.METAEMG, session_split(), [0, 1], learner=learner)
        rows = table.rows()
        assert_array_equal(rows['accuracy'].to_numpy(), 100.0)
        assert_array_equal(rows['std_over_seeds'].to_numpy(), 0.0)
        self.assertEqual(len(table.task_rows), 2 * len(session_split().meta_test))

    def test_pretrains_once_per_seed_on_meta_train(self):
        learner = OracleLearner()
        evaluate_method(Method.CONV_PRETRAIN_3, session_split(), [0, 1, 2], learner=learner)
        n_train = len(session_split().meta_train)
        self.assertEqual(learner.pretrained, [(0, n_train), (1, n_train), (2, n_train)])

    def test_random_learner_is_near_chance(self):
        table = evaluate_method(Method.NO_PRETRAIN_3, session_split(), [0, 1], learner=RandomLearner())
        self.assertGreater(table.mean_accuracy(Method.NO_PRETRAIN_3), 28.0)
        self.assertLess(table.mean_accuracy(Method.NO_PRETRAIN_3), 39.0)

    def test_workers_do_not_change_results(self):
        split = session_split()
        serial = evaluate_method(Method.NO_PRETRAIN_3, split, [0, 1, 2], learner=RandomLearner())
        threaded = evaluate_method(Method.NO_PRETRAIN_3, split, [0, 1, 2], learner=RandomLearner(), workers=3)
        self.assertEqual(serial.task_rows, threaded.task_rows)

    def test_subject_scenario_tests_only_held_out(self):
        split = build_scenario(corpus(), Scenario.SUBJECT, 'S2')
        table = evaluate_method(Method.METAEMG, split, [0], learner=OracleLearner())
        self.assertEqual(list(table.rows()['subject_id']), ['S2', AVERAGE])

    def test_repeated_seeds_are_rejected(self):
        with self.assertRaises(ExperimentError) as ctx:
            evaluate_method(Method.METAEMG, session_split(), [0, 0], learner=OracleLearner())
        self.assertEqual(ctx.exception.code, 'seeds')

    def test_method_spec_epochs(self):
        config = ExperimentConfig()
        self.assertEqual(MethodSpec.resolve('NoPretrain3', config).fine_tune_epochs, 3)
        self.assertEqual(MethodSpec.resolve('ConvPretrainConverged', config).fine_tune_epochs, 50)
        self.assertEqual(MethodSpec.resolve('MetaEMG', config).pretraining, 'meta')


class AblationTests(SimpleTestCase):
    def test_full_fraction_matches_unablated_run(self):
        split = session_split()
        ablated = ablate_support_fraction(split, fractions=[1.0], methods=[Method.METAEMG], seeds=[0],
                                          learner_factory=lambda spec, config: MajorityLearner())
        plain = evaluate_method(Method.METAEMG, split, [0], learner=MajorityLearner())
        assert_array_equal(ablated.rows()['accuracy'].to_numpy(), plain.rows()['accuracy'].to_numpy())

    def test_fraction_shrinks_support(self):
        learner = MajorityLearner()
        split = session_split()
        ablate_support_fraction(split, fractions=[0.25, 1.0], methods=[Method.METAEMG], seeds=[0],
                                learner_factory=lambda spec, config: learner)
        full = [len(t.support) for t in sorted(split.meta_test, key=lambda t: t.source)]
        quarter = learner.support_sizes[:len(full)]
        self.assertEqual(learner.support_sizes[len(full):], full)
        self.assertTrue(all(q < f for q, f in zip(quarter, full)))

    def test_invalid_fraction(self):
        with self.assertRaises(ExperimentError):
            ablate_support_fraction(session_split(), fractions=[0.0], seeds=[0],
                                    learner_factory=lambda spec, config: OracleLearner())

    def test_partition_counts(self):
        subjects = ['S1', 'S2', 'S3', 'S4', 'S5']
        self.assertEqual(len(pretrain_partitions(subjects, 4)), 5)
        self.assertEqual(len(pretrain_partitions(subjects, 1)), 20)
        for chosen, held_out in pretrain_partitions(subjects, 2):
            self.assertNotIn(held_out, chosen)
        with self.assertRaises(ExperimentError) as ctx:
            pretrain_partitions(subjects, 5)
        self.assertEqual(ctx.exception.code, 'subjects')

    def test_pretrain_subjects_records(self):
        learner = OracleLearner()
        table = ablate_pretrain_subjects(corpus(), n_pretrain=[1, 2], methods=[Method.METAEMG], seeds=[0],
                                         learner_factory=lambda spec, config: learner)
        per_subject = len(corpus()) // 3
        # n=1: 3 elecciones x 2 sujetos de prueba; n=2: 3 elecciones x 1
        self.assertEqual(len(table.task_rows), (6 + 3) * per_subject)
        self.assertEqual(len(learner.pretrained), 6)
        self.assertEqual(table.mean_accuracy(Method.METAEMG, n_pretrain=1), 100.0)
        for row in table.task_rows:
            self.assertNotIn(row['subject_id'], row['pretrain_subjects'].split('+'))

    def test_finetune_epochs_are_forwarded(self):
        learner = MajorityLearner()
        table = ablate_finetune_epochs(session_split(), epochs=[1, 3], methods=[Method.NO_PRETRAIN_3], seeds=[0],
                                       learner_factory=lambda spec, config: learner)
        self.assertEqual(set(learner.epochs), {1, 3})
        self.assertEqual(sorted(table.rows()['epochs'].unique()), [1, 3])


class ConfigTests(SimpleTestCase):
    def test_hash_is_stable_and_sensitive(self):
        config = ExperimentConfig()
        self.assertEqual(config.config_hash(), ExperimentConfig().config_hash())
        self.assertNotEqual(config.config_hash(), config.with_seeds([7]).config_hash())

    def test_partial_sections_merge_with_defaults(self):
        config = ExperimentConfig.from_dict({'meta': {'inner_steps': 2}, 'seeds': [4]})
        self.assertEqual(config.meta.inner_steps, 2)
        self.assertEqual(config.meta.alpha, 1e-4)
        self.assertEqual(config.seeds, (4,))

    def test_network_follows_window_length(self):
        network = ExperimentConfig().network_for(100)
        self.assertEqual(network.layer_sizes, (800, 512, 128, 3))

    def test_default_network_size(self):
        self.assertEqual(ExperimentConfig().network.n_params, 885763)

    def test_read_config_file_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            missing = Path(tmp) / 'missing.json'
            with self.assertRaises(ExperimentError) as ctx:
                read_config_file(missing)
            self.assertEqual(ctx.exception.code, 'missing')

            broken = Path(tmp) / 'broken.json'
            broken.write_text('{"meta": ')
            with self.assertRaises(ExperimentError) as ctx:
                read_config_file(broken)
            self.assertEqual(ctx.exception.code, 'json')

            unknown = Path(tmp) / 'unknown.json'
            unknown.write_text('{"learning_rate": 1}')
            with self.assertRaises(ExperimentError) as ctx:
                read_config_file(unknown)
            self.assertEqual(ctx.exception.code, 'config')

    def test_fine_tune_rule(self):
        self.assertEqual(ExperimentConfig().fine_tune_rule, InnerRule.ADAM)
        config = ExperimentConfig.from_dict({'fine_tune_rule': 'sgd', 'fine_tune_batch': None})
        self.assertEqual(config.fine_tune_rule, InnerRule.SGD)
        self.assertEqual(config.to_dict()['fine_tune_rule'], 'sgd')
        self.assertNotEqual(config.config_hash(), ExperimentConfig().config_hash())
        with self.assertRaises(ExperimentError) as ctx:
            ExperimentConfig(fine_tune_rule='rmsprop')
        self.assertEqual(ctx.exception.code, 'rule')

    def test_learner_fine_tunes_with_configured_rule(self):
        config = ExperimentConfig.from_dict({**SMALL, 'fine_tune_rule': 'sgd', 'fine_tune_lr': 0.05,
                                             'fine_tune_batch': None})
        split = session_split()
        learner = NetworkLearner(MethodSpec.resolve(Method.NO_PRETRAIN_3, config), config)
        base = learner.pretrain(split.meta_train, 0)
        task = split.meta_test[0]

        adapted = fine_tune(base, task.support, 3, lr=0.05, batch_size=None, rule=InnerRule.SGD)
        assert_array_equal(learner.adapt_and_predict(base, task, 0), predict_labels(adapted, task.query))

    def test_directional_config_file_loads(self):
        config = read_config_file(settings.BASE_DIR / 'configs' / 'directional.json')
        self.assertEqual(config.fine_tune_rule, InnerRule.SGD)
        self.assertIsNone(config.fine_tune_batch)
        self.assertEqual(config.meta.inner_rule, InnerRule.SGD)
        self.assertEqual(config.network_for(200).layer_sizes, (1600, 64, 32, 3))
        self.assertEqual(config.seeds, (0, 1, 2, 3, 4))
        self.assertEqual(config.corpus.rotation_std, 1.5)

    def test_manifest_records_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp, 'config.json')
            path.write_text(json.dumps(SMALL))
            manifest = run_manifest('eval', read_config_file(path), seeds=[0], config_file=path)
            self.assertEqual(manifest['config_file'], str(path))
            self.assertEqual(len(manifest['config_file_hash']), 64)
            self.assertIsNone(run_manifest('eval', ExperimentConfig())['config_file'])

    def test_manifest_records_hashes(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, 'a.csv').write_text('x\n')
            manifest = run_manifest('eval', ExperimentConfig(), seeds=[0, 1], corpus=tmp)
            self.assertEqual(manifest['corpus_hash'], directory_hash(tmp))
            self.assertEqual(manifest['config_hash'], ExperimentConfig().config_hash())
            self.assertEqual(manifest['seeds'], [0, 1])


class RecordingTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        table = ResultTable(HAND_RECORDS, Scenario.SESSION, [0, 1])
        manifest = run_manifest('eval', ExperimentConfig(), seeds=[0, 1])
        cls.experiment_run = record_run('eval', table, manifest, '/tmp/results')

    def test_rows_are_stored(self):
        self.assertEqual(TaskResult.objects.filter(run=self.experiment_run).count(), 6)
        self.assertEqual(self.experiment_run.cells.count(), 3)
        average = self.experiment_run.cells.get(subject_id=AVERAGE)
        self.assertEqual((average.accuracy, average.std_over_seeds), (56.25, 18.75))
        self.assertIsNone(average.fraction)

    def test_run_requires_seeds(self):
        run = ExperimentRun(kind='eval', scenario='session', config={}, config_hash='x', seeds=[], results_dir='r')
        with self.assertRaises(ValidationError):
            run.full_clean()

    def test_graphql_result_cells(self):
        result = schema.execute('{ resultCells(kind: "eval", minAccuracy: 50) { subjectId accuracy } }')
        self.assertIsNone(result.errors)
        self.assertEqual(sorted(c['subjectId'] for c in result.data['resultCells']), ['AVG', 'S1'])

    def test_graphql_runs(self):
        result = schema.execute('{ experimentRuns(scenario: "session") { configHash seeds } }')
        self.assertIsNone(result.errors)
        self.assertEqual(result.data['experimentRuns'][0]['seeds'], [0, 1])

    def test_graphql_missing_run(self):
        result = schema.execute('{ experimentRunPorId(id: 999) { id } }')
        self.assertEqual(result.errors[0].message, 'Corrida no encontrada.')

    def test_filterset(self):
        filterset = ResultCellFilter(data={'subject_id': 'S2'}, queryset=ResultCell.objects.all())
        self.assertEqual([c.accuracy for c in filterset.qs], [25.0])


class CommandTests(TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.config = self.tmp / 'config.json'
        self.config.write_text(json.dumps(SMALL))

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def test_synth_is_byte_identical(self):
        self.call('synth', '--subjects', '1', '--seed', '4', '--out', str(self.tmp / 'a'))
        self.call('synth', '--subjects', '1', '--seed', '4', '--out', str(self.tmp / 'b'))
        self.assertEqual(directory_hash(self.tmp / 'a'), directory_hash(self.tmp / 'b'))
        self.assertEqual((self.tmp / 'a' / 'manifest.json').read_bytes(),
                         (self.tmp / 'b' / 'manifest.json').read_bytes())
        self.assertEqual(len(list((self.tmp / 'a').glob('*.csv'))), 14)

    def test_missing_checkpoint_names_path(self):
        missing = self.tmp / 'nothing.ckpt'
        with self.assertRaises(CommandError) as ctx:
            self.call('eval', '--methods', 'MetaEMG', '--checkpoint', str(missing))
        self.assertIn(str(missing), str(ctx.exception))

    def test_missing_config_is_a_command_error(self):
        with self.assertRaises(CommandError):
            self.call('eval', '--config', str(self.tmp / 'nope.json'))

    def test_preprocess_then_eval(self):
        corpus_dir, tasks_dir, out = self.tmp / 'corpus', self.tmp / 'tasks', self.tmp / 'eval'
        self.call('synth', '--subjects', '2', '--out', str(corpus_dir))
        self.call('preprocess', '--corpus', str(corpus_dir), '--out', str(tasks_dir), '--config', str(self.config))
        self.assertEqual(len(list(tasks_dir.glob('*.task'))), 28)

        self.call('eval', '--methods', 'NoPretrain3', '--seeds', '0', '--corpus', str(tasks_dir),
                  '--out', str(out), '--config', str(self.config), '--record')
        self.assertTrue((out / 'table.csv').is_file())
        manifest = json.loads((out / 'manifest.json').read_text())
        self.assertEqual(manifest['seeds'], [0])
        run = ExperimentRun.objects.get()
        self.assertEqual(run.config_hash, manifest['config_hash'])
        self.assertEqual(run.task_results.count(), 12)

    def test_gradcheck_quick(self):
        output = self.call('gradcheck', '--quick', '--out', str(self.tmp / 'gradcheck.json'))
        self.assertIn('umbral', output)
        reports = json.loads((self.tmp / 'gradcheck.json').read_text())
        self.assertTrue(all(r['passed'] for r in reports))
        manifest = json.loads((self.tmp / 'manifest.json').read_text())
        self.assertEqual(manifest['kind'], 'gradcheck')
        self.assertFalse(manifest['full'])
        self.assertTrue(manifest['passed'])
        self.assertEqual([r['name'] for r in manifest['reports']], [r['name'] for r in reports])
        self.assertEqual(manifest['config_hash'], ExperimentConfig().config_hash())
        self.assertIn('numpy', manifest['versions'])

    def make_tasks(self, subjects=2):
        corpus_dir, tasks_dir = self.tmp / 'corpus', self.tmp / 'tasks'
        self.call('synth', '--subjects', str(subjects), '--out', str(corpus_dir))
        self.call('preprocess', '--corpus', str(corpus_dir), '--out', str(tasks_dir), '--config', str(self.config))
        return tasks_dir

    def test_train_checkpoint_is_identical_across_runs_and_workers(self):
        tasks_dir = self.make_tasks()
        config = self.tmp / 'meta.json'
        config.write_text(json.dumps({**SMALL, 'meta': {'alpha': 0.01, 'inner_steps': 2, 'outer_epochs': 2}}))
        outputs = []
        for name, workers in (('a', '1'), ('b', '1'), ('c', '2')):
            out = self.tmp / 'train' / name
            self.call('train', '--method', 'MetaEMG', '--seed', '0', '--corpus', str(tasks_dir),
                      '--config', str(config), '--workers', workers, '--out', str(out))
            outputs.append(out)

        checkpoints = [(out / 'theta.ckpt').read_bytes() for out in outputs]
        self.assertEqual(checkpoints[0], checkpoints[1])
        self.assertEqual(checkpoints[0], checkpoints[2])
        manifest = json.loads((outputs[2] / 'manifest.json').read_text())
        self.assertEqual(manifest['config_file'], str(config))
        self.assertEqual(manifest['config']['meta']['workers'], 2)
        self.assertEqual(manifest['seeds'], [0])

    def test_ablate_fraction_writes_one_row_per_fraction(self):
        tasks_dir = self.make_tasks()
        out = self.tmp / 'ablate'
        self.call('ablate', 'fraction', '--fractions', '0.5', '1.0', '--methods', 'NoPretrain3', '--seeds', '0',
                  '--corpus', str(tasks_dir), '--config', str(self.config), '--out', str(out))

        table = pd.read_csv(out / 'table.csv')
        average = table[table['subject_id'] == 'AVG']
        self.assertEqual(sorted(average['fraction']), [0.5, 1.0])
        self.assertTrue(average['accuracy'].between(0, 100).all())
        self.assertTrue((out / 'by_condition.csv').is_file())
        manifest = json.loads((out / 'manifest.json').read_text())
        self.assertEqual(manifest['kind'], 'fraction')
        self.assertEqual(manifest['config_file'], str(self.config))

    def test_unknown_subcommand_exits_nonzero(self):
        with redirect_stderr(StringIO()):
            self.assertNotEqual(main(['manage.py', 'no-such-command']), 0)


DIRECTIONAL_CONFIG = settings.BASE_DIR / 'configs' / 'directional.json'
DIRECTIONAL_SUBJECTS = 5


@lru_cache(maxsize=None)
def directional_corpus():
    config = read_config_file(DIRECTIONAL_CONFIG)
    recordings = generate_corpus(DIRECTIONAL_SUBJECTS, seed=0, config=config.corpus)
    return tuple(split_task(rec, config.window) for rec in recordings)


@tag('slow')
@unittest.skipUnless(os.environ.get('METAEMG_SLOW_TESTS') == '1', 'METAEMG_SLOW_TESTS=1 para correrla')
class DirectionalTests(SimpleTestCase):
    """Orden esperado de los métodos con ``configs/directional.json`` (lentas, cinco semillas)."""

    MARGIN = 1.0

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = read_config_file(DIRECTIONAL_CONFIG)

    def accuracy(self, method, split):
        table = evaluate_method(method, split, self.config.seeds, config=self.config)
        return table.mean_accuracy(method)

    def test_config_file_uses_five_seeds(self):
        self.assertGreaterEqual(len(self.config.seeds), 5)
        self.assertEqual(self.config.fine_tune_rule, InnerRule.SGD)
        self.assertEqual(self.config.fine_tune_lr, self.config.meta.alpha)
        self.assertEqual(self.config.short_epochs, self.config.meta.inner_steps)

    def test_session_adaptation_ranks_meta_over_conventional_over_none(self):
        split = build_scenario(directional_corpus(), Scenario.SESSION)
        meta = self.accuracy(Method.METAEMG, split)
        conventional = self.accuracy(Method.CONV_PRETRAIN_3, split)
        plain = self.accuracy(Method.NO_PRETRAIN_3, split)

        self.assertGreaterEqual(meta, conventional + self.MARGIN)
        self.assertGreaterEqual(conventional, plain + self.MARGIN)

    def test_subject_adaptation_meta_not_below_conventional(self):
        meta, conventional = [], []
        for held_out in sorted({t.subject_id for t in directional_corpus()}):
            split = build_scenario(directional_corpus(), Scenario.SUBJECT, held_out)
            meta.append(self.accuracy(Method.METAEMG, split))
            conventional.append(self.accuracy(Method.CONV_PRETRAIN_3, split))
        self.assertGreaterEqual(np.mean(meta), np.mean(conventional))

    def test_more_support_never_hurts(self):
        split = build_scenario(directional_corpus(), Scenario.SESSION)
        methods = [Method.METAEMG, Method.CONV_PRETRAIN_3, Method.NO_PRETRAIN_3]
        table = ablate_support_fraction(split, fractions=[0.25, 1.0], methods=methods, seeds=self.config.seeds,
                                        config=self.config)
        for method in methods:
            with self.subTest(method=method):
                self.assertGreaterEqual(table.mean_accuracy(method, fraction=1.0),
                                        table.mean_accuracy(method, fraction=0.25))
        self.assertGreater(table.mean_accuracy(Method.METAEMG, fraction=0.25), 100 / 3)

    def test_meta_gains_at_least_as_much_from_more_pretraining_subjects(self):
        table = ablate_pretrain_subjects(directional_corpus(), n_pretrain=[1, 4], seeds=self.config.seeds,
                                         config=self.config)

        def gain(method):
            return table.mean_accuracy(method, n_pretrain=4) - table.mean_accuracy(method, n_pretrain=1)

        self.assertGreaterEqual(gain(Method.METAEMG), gain(Method.CONV_PRETRAIN_3))

    def test_untrained_network_is_near_chance(self):
        class Untrained:
            def pretrain(self, tasks, seed):
                return init_params(ExperimentConfig().network, seed=seed)

            def adapt_and_predict(self, base, task, seed, epochs=None):
                return predict_labels(base, task.query)

        table = evaluate_method(Method.NO_PRETRAIN_3, session_split(), range(6), learner=Untrained())
        self.assertGreaterEqual(table.mean_accuracy(Method.NO_PRETRAIN_3), 25.0)
        self.assertLessEqual(table.mean_accuracy(Method.NO_PRETRAIN_3), 45.0)
