"""Base común de los comandos de gestión (``manage.py synth``, ``train``, ``eval``...)."""
import dataclasses
import logging
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from tasks.splits import Scenario, build_scenario
from tasks.storage import load_any

from .config import read_config_file
from .manifest import run_manifest, write_manifest
from .recording import record_run

logger = logging.getLogger(__name__)


def results_dir(*parts):
    return Path(settings.METAEMG['RESULTS_DIR']).joinpath(*parts)


def describe(error: ValidationError):
    return '; '.join(error.messages)


class ExperimentCommand(BaseCommand):
    """Convierte los errores de validación en CommandError y resuelve opciones comunes."""

    def add_config_argument(self, parser):
        parser.add_argument('--config', help='Archivo JSON que sobrescribe la configuración por defecto.')

    def add_workers_argument(self, parser):
        parser.add_argument('--workers', type=int, default=settings.METAEMG['WORKERS'],
                            help='Hilos para el trabajo independiente (1 = secuencial).')

    def add_corpus_arguments(self, parser):
        parser.add_argument('--corpus', default=str(results_dir('corpus')),
                            help='Carpeta con grabaciones CSV o tareas preprocesadas.')
        parser.add_argument('--scenario', choices=Scenario.values, default=Scenario.SESSION)
        parser.add_argument('--held-out', dest='held_out', help='Sujeto excluido (adaptación de sujeto).')

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except ValidationError as exc:
            logger.error('%s: %s', self.__module__.rsplit('.', 1)[-1], describe(exc))
            raise CommandError(describe(exc))
        except FileNotFoundError as exc:
            raise CommandError(f"No existe {exc.filename}.")

    def load_config(self, options):
        config = read_config_file(options.get('config'))
        if options.get('workers'):
            config = dataclasses.replace(config, meta=dataclasses.replace(config.meta, workers=options['workers']))
        return config

    def load_corpus(self, options, config):
        corpus = Path(options['corpus'])
        if not corpus.is_dir():
            raise CommandError(f"No existe la carpeta del corpus {corpus}.")
        return load_any(corpus, config.window)

    def load_split(self, options, config):
        tasks = self.load_corpus(options, config)
        return build_scenario(tasks, options['scenario'], options.get('held_out'))

    def add_output_arguments(self, parser):
        parser.add_argument('--seeds', type=int, nargs='+', help='Semillas de entrenamiento (por defecto las de la configuración).')
        parser.add_argument('--out', help='Carpeta de resultados.')
        parser.add_argument('--record', action='store_true', help='Registrar la corrida en la base de datos.')

    def emit(self, kind, table, out, config, options, **extra):
        """Escribe CSV, JSON, desglose por condición y manifiesto; registra si se pidió."""
        out = Path(out)
        csv_path, json_path = table.write(out, 'table')
        table.by_condition().to_csv(out / 'by_condition.csv', index=False, float_format='%.6f', lineterminator='\n')
        manifest = run_manifest(kind, config, seeds=table.seeds, corpus=options.get('corpus'),
                                config_file=options.get('config'), table=table.metadata(), **extra)
        write_manifest(out, manifest)
        if options.get('record'):
            run = record_run(kind, table, manifest, out)
            self.success(f"Corrida registrada con id {run.pk}")
        self.stdout.write(table.rows().to_string(index=False, float_format=lambda v: f'{v:.2f}'))
        self.success(f"Resultados en {csv_path} y {json_path}")
        return manifest

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))
