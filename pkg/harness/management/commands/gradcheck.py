import json
from pathlib import Path

from django.core.management.base import CommandError

from harness.cli import ExperimentCommand, results_dir
from harness.config import ExperimentConfig
from harness.manifest import run_manifest, write_manifest
from meta.oracles import run_suites

REPORT_NAME = 'gradcheck.json'


class Command(ExperimentCommand):
    help = 'Ejecuta los oráculos de diferencias finitas de nn y meta e imprime los errores máximos.'

    def add_arguments(self, parser):
        parser.add_argument('--quick', action='store_true', help='Omite la red completa.')
        parser.add_argument('--out', help=f'Archivo JSON del informe (por defecto results/gradcheck/{REPORT_NAME}); '
                                          'el manifiesto se escribe en la misma carpeta.')

    def handle(self, *args, **options):
        full = not options['quick']
        reports = run_suites(full=full)
        for report in reports:
            line = (f"{report.name:<28} error relativo máximo {report.max_relative_error:.3e} "
                    f"(umbral {report.threshold:.0e}, {report.checked} coordenadas)")
            self.stdout.write(self.style.SUCCESS(line) if report.passed else self.style.ERROR(line))

        path = Path(options['out'] or results_dir('gradcheck', REPORT_NAME))
        path.parent.mkdir(parents=True, exist_ok=True)
        summary = [r.to_dict() for r in reports]
        path.write_text(json.dumps(summary, indent=2) + '\n', encoding='utf-8')
        write_manifest(path.parent, run_manifest(
            'gradcheck', ExperimentConfig(), full=full, report=path.name, reports=summary,
            passed=all(r.passed for r in reports),
        ))

        failed = [r.name for r in reports if not r.passed]
        if failed:
            raise CommandError(f"Oráculos por encima del umbral: {', '.join(failed)}")
        self.success('Todos los oráculos por debajo del umbral.')
