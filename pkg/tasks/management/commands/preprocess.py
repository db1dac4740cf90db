import json
from pathlib import Path

from harness.cli import ExperimentCommand, results_dir
from harness.manifest import directory_hash, run_manifest, write_manifest
from tasks.storage import TASK_SUFFIX, save_task, tasks_from_recordings


class Command(ExperimentCommand):
    help = 'Convierte las grabaciones CSV en archivos de tarea con soporte y consulta.'

    def add_arguments(self, parser):
        parser.add_argument('--corpus', default=str(results_dir('corpus')))
        parser.add_argument('--out', default=str(results_dir('tasks')))
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        config = self.load_config(options)
        out = Path(options['out'])
        tasks = tasks_from_recordings(options['corpus'], config.window)
        for task in tasks:
            save_task(task, out / f'{task.task_id}{TASK_SUFFIX}')

        manifest = run_manifest('preprocess', config, corpus=options['corpus'],
                                window=config.window.to_dict(), tasks=[t.summary() for t in tasks],
                                output_hash=directory_hash(out))
        write_manifest(out, manifest)
        self.stdout.write(json.dumps({'tasks': len(tasks), 'out': str(out)}))
        self.success(f"{len(tasks)} tareas escritas en {out}")
