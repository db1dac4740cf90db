"""Registro de una ResultTable en la base de datos."""
import logging
import math

from django.db import transaction

from .evaluation import ResultTable
from .models import ExperimentRun, ResultCell, TaskResult

logger = logging.getLogger(__name__)

TAG_FIELDS = ('fraction', 'n_pretrain', 'epochs')


def _tag(row, name):
    value = row.get(name)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return value.item() if hasattr(value, 'item') else value


@transaction.atomic
def record_run(kind, table: ResultTable, manifest, results_dir) -> ExperimentRun:
    run = ExperimentRun(
        kind=kind,
        scenario=table.scenario,
        held_out=table.params.get('held_out') or '',
        config=manifest['config'],
        config_hash=manifest['config_hash'],
        corpus_hash=manifest.get('corpus_hash') or '',
        seeds=table.seeds,
        results_dir=str(results_dir),
    )
    run.full_clean()
    run.save()

    TaskResult.objects.bulk_create([
        TaskResult(
            run=run,
            method=row['method'],
            seed=row['seed'],
            task_id=row['task_id'],
            subject_id=row['subject_id'],
            day=row['day'],
            condition=row['condition'],
            correct=row['correct'],
            total=row['total'],
            accuracy=row['accuracy'],
            **{name: _tag(row, name) for name in TAG_FIELDS},
        )
        for row in table.task_rows
    ])

    cells = table.rows().to_dict(orient='records')
    ResultCell.objects.bulk_create([
        ResultCell(
            run=run,
            method=cell['method'],
            subject_id=cell['subject_id'],
            accuracy=float(cell['accuracy']),
            std_over_seeds=float(cell['std_over_seeds']),
            n_tasks=int(cell['n_tasks']),
            **{name: _tag(cell, name) for name in TAG_FIELDS},
        )
        for cell in cells
    ])
    logger.info('Corrida %d registrada: %d tareas, %d celdas', run.pk, len(table.task_rows), len(cells))
    return run
