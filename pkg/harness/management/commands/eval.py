from pathlib import Path

from django.core.management.base import CommandError

from harness.cli import ExperimentCommand, results_dir
from harness.evaluation import ResultTable, evaluate_method
from harness.methods import Method, MethodSpec, build_learner
from nn.checkpoint import load_checkpoint


class Command(ExperimentCommand):
    help = 'Evalúa métodos en la meta-prueba de un escenario (ajuste fino + precisión en la consulta).'

    def add_arguments(self, parser):
        parser.add_argument('--methods', nargs='+', choices=Method.values, default=Method.values)
        parser.add_argument('--checkpoint', action='append', default=[],
                            help='θ preentrenado; uno para todas las semillas o uno por semilla.')
        self.add_corpus_arguments(parser)
        self.add_output_arguments(parser)
        self.add_config_argument(parser)
        self.add_workers_argument(parser)

    def handle(self, *args, **options):
        config = self.load_config(options)
        seeds = options['seeds'] or list(config.seeds)
        base_params = self.load_checkpoints(options['checkpoint'], seeds, options['methods'])
        split = self.load_split(options, config)

        tables = []
        for method in options['methods']:
            spec = MethodSpec.resolve(method, config)
            learner = build_learner(spec, config, base_params)
            tables.append(evaluate_method(spec, split, seeds, config, learner=learner, workers=options['workers']))
        table = ResultTable.merge(tables, params={'held_out': split.held_out, 'methods': options['methods']})

        name = '_'.join(filter(None, ['eval', split.scenario.value, split.held_out]))
        out = Path(options['out'] or results_dir(name))
        self.emit('eval', table, out, config, options, checkpoints=options['checkpoint'])

    def load_checkpoints(self, paths, seeds, methods):
        if not paths:
            return None
        if len(methods) != 1:
            raise CommandError('Con --checkpoint se evalúa un único método (--methods).')
        if len(paths) not in (1, len(seeds)):
            raise CommandError(f"Se dieron {len(paths)} checkpoints para {len(seeds)} semillas.")
        loaded = [load_checkpoint(path)[0] for path in paths]
        if len(loaded) == 1:
            return loaded[0]
        return dict(zip(seeds, loaded))
