"""Archivos de tareas preprocesadas (``*.task``) y lectura de corpus completos."""
import logging
from pathlib import Path

from dataio.containers import read_arrays, write_arrays
from dataio.recordings import parse_recording
from dataio.types import WindowBatch, WindowConfig

from .exceptions import TaskStructureError
from .splits import Task, TaskSource, split_task

logger = logging.getLogger(__name__)

TASK_SUFFIX = '.task'


def save_task(task: Task, path):
    """Guarda la señal preprocesada y los índices de ventana (no las ventanas copiadas)."""
    if len(task.support.signals) != 1 or task.support.signals[0] is not task.query.signals[0]:
        raise TaskStructureError('Solo se guardan tareas de una única grabación.', code='signals')
    meta = {
        'kind': 'task',
        'source': {
            'subject_id': task.source.subject_id,
            'day': task.source.day,
            'condition': task.source.condition,
            'repetition': task.source.repetition,
            'recording_id': task.source.recording_id,
        },
        'boundary_k': task.boundary_k,
        'n': task.n,
        'window_length': task.support.window_length,
    }
    return write_arrays(path, meta, {
        'signal': task.support.signals[0],
        'support_t_end': task.support.t_end,
        'support_labels': task.support.labels,
        'query_t_end': task.query.t_end,
        'query_labels': task.query.labels,
    })


def load_task(path) -> Task:
    meta, arrays = read_arrays(path)
    if meta.get('kind') != 'task':
        raise TaskStructureError(f"{path} no es un archivo de tarea.", code='format')
    source = TaskSource(**meta['source'])
    signal = arrays['signal']
    key = (source.subject_id, source.day, source.condition)
    return Task(
        support=WindowBatch.from_signal(signal, arrays['support_t_end'], arrays['support_labels'],
                                        meta['window_length'], key),
        query=WindowBatch.from_signal(signal, arrays['query_t_end'], arrays['query_labels'],
                                      meta['window_length'], key),
        source=source,
        boundary_k=meta['boundary_k'],
        n=meta['n'],
    )


def load_tasks(directory):
    """Carga todas las tareas de una carpeta, en orden de nombre de archivo."""
    directory = Path(directory)
    if not directory.is_dir():
        raise TaskStructureError(f"No existe la carpeta de tareas {directory}.", code='missing')
    paths = sorted(directory.glob(f'*{TASK_SUFFIX}'))
    if not paths:
        raise TaskStructureError(f"{directory} no contiene archivos {TASK_SUFFIX}.", code='empty')
    return [load_task(path) for path in paths]


def tasks_from_recordings(directory, window_config: WindowConfig = WindowConfig()):
    """Lee todos los CSV de una carpeta de corpus y los divide en tareas."""
    directory = Path(directory)
    paths = sorted(directory.glob('*.csv'))
    if not paths:
        raise TaskStructureError(f"{directory} no contiene grabaciones CSV.", code='empty')
    tasks = [split_task(parse_recording(path), window_config) for path in paths]
    logger.info('%d tareas construidas desde %s', len(tasks), directory)
    return tasks


def load_any(directory, window_config: WindowConfig = WindowConfig()):
    """Tareas preprocesadas si existen; si no, se construyen desde los CSV."""
    directory = Path(directory)
    if directory.is_dir() and any(directory.glob(f'*{TASK_SUFFIX}')):
        return load_tasks(directory)
    if not directory.is_dir():
        raise TaskStructureError(f"No existe la carpeta {directory}.", code='missing')
    return tasks_from_recordings(directory, window_config)
