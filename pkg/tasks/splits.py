"""Tareas de meta-aprendizaje (soporte = primer movimiento, consulta = resto) y escenarios."""
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.db import models

from dataio.preprocessing import preprocess
from dataio.types import Intent, RawRecording, WindowBatch, WindowConfig

from .exceptions import ScenarioError, TaskStructureError

logger = logging.getLogger(__name__)


class Scenario(models.TextChoices):
    SESSION = 'session', 'Adaptación de sesión'
    SUBJECT = 'subject', 'Adaptación de sujeto'


@dataclass(frozen=True, order=True)
class TaskSource:
    subject_id: str
    day: int
    condition: str
    repetition: int = 0
    recording_id: str = ''

    @property
    def task_id(self):
        return self.recording_id or f"{self.subject_id}_d{self.day}_{self.condition}_r{self.repetition}"


@dataclass(frozen=True, eq=False)
class Task:
    support: WindowBatch
    query: WindowBatch
    source: TaskSource
    boundary_k: int
    n: int

    def __post_init__(self):
        if len(self.support) == 0 or len(self.query) == 0:
            raise TaskStructureError(f"{self.task_id}: soporte y consulta no pueden estar vacíos.", code='empty')
        if self.support.t_end.max() > self.boundary_k or self.query.t_end.min() <= self.boundary_k:
            raise TaskStructureError(f"{self.task_id}: ventanas del lado equivocado del límite.", code='boundary')

    @property
    def task_id(self):
        return self.source.task_id

    @property
    def subject_id(self):
        return self.source.subject_id

    def all_windows(self):
        return WindowBatch.concatenate([self.support, self.query])

    def summary(self):
        return {
            'task_id': self.task_id,
            'subject_id': self.source.subject_id,
            'day': self.source.day,
            'condition': self.source.condition,
            'repetition': self.source.repetition,
            'boundary_k': self.boundary_k,
            'n': self.n,
            'n_support': len(self.support),
            'n_query': len(self.query),
        }


def motion_boundary(rec: RawRecording) -> int:
    """Último índice del relax que sigue al primer cierre."""
    runs = rec.runs()
    opens, closes = rec.motion_counts()
    if (opens, closes) != (3, 3):
        raise TaskStructureError(
            f"{rec.recording_id or rec.subject_id}: se esperaban tres movimientos, "
            f"hay {opens} aperturas y {closes} cierres.",
            code='structure',
        )
    first_close = next(i for i, (intent, _, _) in enumerate(runs) if intent == Intent.CLOSE)
    if first_close + 1 >= len(runs) or runs[first_close + 1][0] != Intent.RELAX:
        raise TaskStructureError('El primer cierre no va seguido de un relax.', code='structure')
    return runs[first_close + 1][2]


def split_task(rec: RawRecording, window_config: WindowConfig = WindowConfig()) -> Task:
    """Divide una grabación en soporte (t_end <= k) y consulta (t_end > k)."""
    boundary = motion_boundary(rec)
    windows = preprocess(rec, window_config)
    in_support = windows.t_end <= boundary
    task = Task(
        support=windows.take(np.flatnonzero(in_support)),
        query=windows.take(np.flatnonzero(~in_support)),
        source=TaskSource(
            subject_id=rec.subject_id,
            day=rec.day,
            condition=rec.condition.value,
            repetition=rec.repetition,
            recording_id=rec.recording_id,
        ),
        boundary_k=boundary,
        n=rec.n_samples - 1,
    )
    logger.debug('%s: k=%d, %d soporte / %d consulta', task.task_id, boundary, len(task.support), len(task.query))
    return task


@dataclass(frozen=True, eq=False)
class ScenarioSplit:
    meta_train: tuple
    meta_test: tuple
    scenario: Scenario
    held_out: Optional[str] = None

    def __post_init__(self):
        if self.scenario == Scenario.SESSION:
            if any(t.source.day != 1 for t in self.meta_train) or any(t.source.day != 2 for t in self.meta_test):
                raise ScenarioError('Adaptación de sesión: entrenamiento del día 1 y prueba del día 2.', code='days')
        else:
            if any(t.subject_id != self.held_out for t in self.meta_test):
                raise ScenarioError('La prueba solo puede contener al sujeto excluido.', code='held_out')
            if any(t.subject_id == self.held_out for t in self.meta_train):
                raise ScenarioError('El sujeto excluido aparece en el entrenamiento.', code='held_out')

    def to_manifest(self):
        return {
            'scenario': self.scenario.value,
            'held_out': self.held_out,
            'meta_train': [t.summary() for t in self.meta_train],
            'meta_test': [t.summary() for t in self.meta_test],
            'counts': {'meta_train': len(self.meta_train), 'meta_test': len(self.meta_test)},
        }


def build_scenario(corpus, scenario, held_out: Optional[str] = None) -> ScenarioSplit:
    """Arma la división de meta-entrenamiento y meta-prueba de un escenario."""
    tasks = sorted(corpus, key=lambda t: t.source)
    if not tasks:
        raise ScenarioError('El corpus de tareas está vacío.', code='empty')
    scenario = Scenario(scenario)

    if scenario == Scenario.SESSION:
        if held_out is not None:
            raise ScenarioError('La adaptación de sesión no excluye sujetos.', code='held_out')
        meta_train = [t for t in tasks if t.source.day == 1]
        meta_test = [t for t in tasks if t.source.day == 2]
    else:
        if held_out is None:
            raise ScenarioError('La adaptación de sujeto requiere un sujeto excluido.', code='held_out')
        if held_out not in {t.subject_id for t in tasks}:
            raise ScenarioError(f"El sujeto {held_out} no está en el corpus.", code='missing')
        meta_train = [t for t in tasks if t.subject_id != held_out]
        meta_test = [t for t in tasks if t.subject_id == held_out]

    if not meta_train or not meta_test:
        raise ScenarioError('La división deja un lado vacío.', code='empty')
    return ScenarioSplit(tuple(meta_train), tuple(meta_test), scenario, held_out)


def downsample_support(task: Task, fraction: float, seed: int = 0, mode: str = 'prefix') -> Task:
    """Reduce el soporte a ceil(fraction·|soporte|) ventanas.

    ``prefix`` conserva el inicio contiguo de la demostración; ``random`` toma un
    subconjunto uniforme (ordenado en el tiempo) con la semilla dada.
    """
    if not 0.0 < fraction <= 1.0:
        raise ScenarioError(f"Fracción {fraction} fuera de (0, 1].", code='fraction')
    if mode not in ('prefix', 'random'):
        raise ScenarioError(f"Modo de submuestreo desconocido: {mode!r}.", code='mode')
    total = len(task.support)
    count = min(total, max(1, math.ceil(fraction * total - 1e-9)))
    if count == total:
        return task

    if mode == 'prefix':
        indices = np.arange(count)
    else:
        rng = np.random.default_rng(seed)
        indices = np.sort(rng.choice(total, size=count, replace=False))
    return dataclasses.replace(task, support=task.support.take(indices))
