"""Evaluación de métodos sobre una división y tablas de resultados.

La precisión de una tarea es la fracción de ventanas de consulta bien
clasificadas. Se promedia primero por tarea, luego por sujeto y semilla; la
desviación estándar es sobre semillas (forma poblacional) de la media por sujeto.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from synth.profiles import derive_seed
from tasks.splits import ScenarioSplit

from .config import ExperimentConfig
from .exceptions import ExperimentError
from .methods import MethodSpec, build_learner

logger = logging.getLogger(__name__)

AVERAGE = 'AVG'
AGGREGATION = 'task -> subject -> seed; std over seeds (ddof=0) of the per-subject mean'
RECORD_COLUMNS = ['method', 'seed', 'task_id', 'subject_id', 'day', 'condition', 'correct', 'total', 'accuracy']


@dataclass(frozen=True)
class TaskRecord:
    method: str
    seed: int
    task_id: str
    subject_id: str
    day: int
    condition: str
    correct: int
    total: int
    tags: dict = field(default_factory=dict)

    @property
    def accuracy(self):
        return 100.0 * self.correct / self.total

    def to_dict(self):
        data = asdict(self)
        tags = data.pop('tags')
        return {**data, **tags, 'accuracy': self.accuracy}


@dataclass(frozen=True)
class Variant:
    """Un conjunto de tareas de prueba evaluado sobre el mismo preentrenamiento."""

    tasks: tuple
    tags: dict = field(default_factory=dict)
    transform: Optional[Callable] = None
    epochs: Optional[int] = None


class ResultTable:
    """Registros por tarea y su agregación por (método, etiquetas de ablación, sujeto)."""

    def __init__(self, records, scenario, seeds, params=None, keys=()):
        self.task_rows = [r.to_dict() if isinstance(r, TaskRecord) else dict(r) for r in records]
        columns = None if self.task_rows else RECORD_COLUMNS + list(keys)
        self.records = pd.DataFrame(self.task_rows, columns=columns)
        self.scenario = str(scenario)
        self.seeds = [int(s) for s in seeds]
        self.params = dict(params or {})
        self.keys = list(keys)

    @property
    def group_keys(self):
        return ['method'] + self.keys

    def rows(self):
        """Una fila por (método, etiquetas, sujeto) más la fila de promedio ``AVG``."""
        if self.records.empty:
            return pd.DataFrame(columns=self.group_keys + ['subject_id', 'accuracy', 'std_over_seeds', 'n_tasks'])
        keys = self.group_keys
        per_subject = (self.records
                       .groupby(keys + ['seed', 'subject_id'], sort=True)
                       .agg(accuracy=('accuracy', 'mean'), n_tasks=('task_id', 'nunique'))
                       .reset_index())
        per_average = (per_subject
                       .groupby(keys + ['seed'], sort=True)
                       .agg(accuracy=('accuracy', 'mean'), n_tasks=('n_tasks', 'sum'))
                       .reset_index()
                       .assign(subject_id=AVERAGE))
        combined = pd.concat([per_subject, per_average], ignore_index=True)
        table = (combined
                 .groupby(keys + ['subject_id'], sort=False)
                 .agg(accuracy=('accuracy', 'mean'),
                      std_over_seeds=('accuracy', lambda s: float(np.std(s.to_numpy(), ddof=0))),
                      n_tasks=('n_tasks', 'max'))
                 .reset_index())
        table['is_average'] = table['subject_id'] == AVERAGE
        table = table.sort_values(keys + ['is_average', 'subject_id'], kind='stable').drop(columns='is_average')
        return table.reset_index(drop=True)

    def cell(self, method, subject_id=AVERAGE, **tags):
        rows = self.rows()
        mask = (rows['method'] == str(method)) & (rows['subject_id'] == subject_id)
        for key, value in tags.items():
            mask &= rows[key] == value
        selected = rows[mask]
        if selected.empty:
            raise ExperimentError(f"No hay resultados para {method}/{subject_id} {tags}.", code='missing')
        return selected.iloc[0]

    def mean_accuracy(self, method, **tags):
        return float(self.cell(method, AVERAGE, **tags)['accuracy'])

    def by_condition(self):
        """Precisión media por (método, etiquetas, condición), promediando tareas y semillas."""
        if self.records.empty:
            return pd.DataFrame(columns=self.group_keys + ['condition', 'accuracy'])
        return (self.records
                .groupby(self.group_keys + ['condition'], sort=True)
                .agg(accuracy=('accuracy', 'mean'))
                .reset_index())

    def metadata(self):
        return {
            'scenario': self.scenario,
            'seeds': self.seeds,
            'params': self.params,
            'keys': self.keys,
            'aggregation': AGGREGATION,
        }

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.rows().to_csv(path, index=False, float_format='%.6f', lineterminator='\n')
        return path

    def to_json(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {**self.metadata(), 'records': self.task_rows}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        return path

    def write(self, directory, name):
        directory = Path(directory)
        return self.to_csv(directory / f'{name}.csv'), self.to_json(directory / f'{name}.json')

    @classmethod
    def merge(cls, tables, params=None):
        tables = list(tables)
        if not tables:
            raise ExperimentError('No hay tablas para combinar.', code='empty')
        first = tables[0]
        records = [row for table in tables for row in table.task_rows]
        return cls(records, first.scenario, first.seeds, params or first.params, first.keys)


def _check_seeds(seeds):
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ExperimentError('Se requiere al menos una semilla.', code='seeds')
    if len(set(seeds)) != len(seeds):
        raise ExperimentError('Semillas repetidas.', code='seeds')
    return seeds


def run_method(spec: MethodSpec, meta_train, variants, seeds, config: ExperimentConfig, learner=None, workers=1):
    """Preentrena una vez por semilla y evalúa cada variante sobre ese punto de partida."""
    seeds = _check_seeds(seeds)
    learner = learner or build_learner(spec, config)
    meta_train = tuple(meta_train)

    def one_seed(seed):
        base = learner.pretrain(meta_train, seed)
        records = []
        for variant in variants:
            tasks = sorted(variant.tasks, key=lambda t: t.source)
            for index, task in enumerate(tasks):
                adapt_seed = derive_seed(seed, index)
                if variant.transform is not None:
                    task = variant.transform(task, adapt_seed)
                predicted = np.asarray(learner.adapt_and_predict(base, task, adapt_seed, variant.epochs))
                labels = task.query.labels
                records.append(TaskRecord(
                    method=spec.method.value,
                    seed=seed,
                    task_id=task.task_id,
                    subject_id=task.subject_id,
                    day=task.source.day,
                    condition=task.source.condition,
                    correct=int(np.sum(predicted == labels)),
                    total=int(labels.shape[0]),
                    tags=dict(variant.tags),
                ))
        logger.info('%s semilla %d: %d tareas evaluadas', spec.method, seed, len(records))
        return records

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(one_seed, seeds))
    else:
        per_seed = [one_seed(seed) for seed in seeds]
    return [record for records in per_seed for record in records]


def check_split(split):
    if not isinstance(split, ScenarioSplit):
        raise ExperimentError('Se esperaba una ScenarioSplit.', code='split')
    if not split.meta_train or not split.meta_test:
        raise ExperimentError('La división tiene un lado vacío.', code='split')


def evaluate_method(method, split: ScenarioSplit, seeds, config: ExperimentConfig = ExperimentConfig(),
                    learner=None, workers=1) -> ResultTable:
    """Preentrena con meta_train, ajusta en cada soporte de prueba y mide la precisión en su consulta."""
    check_split(split)
    spec = method if isinstance(method, MethodSpec) else MethodSpec.resolve(method, config)
    records = run_method(spec, split.meta_train, [Variant(split.meta_test)], seeds, config, learner, workers)
    return ResultTable(records, split.scenario, seeds, params={'held_out': split.held_out, **spec.to_dict()})
