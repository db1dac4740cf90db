from pathlib import Path

from harness.ablations import (
    ALL_METHODS, PRETRAIN_METHODS, ablate_finetune_epochs, ablate_pretrain_subjects, ablate_support_fraction,
)
from harness.cli import ExperimentCommand, results_dir
from harness.methods import Method

KINDS = ('fraction', 'subjects', 'epochs')


class Command(ExperimentCommand):
    help = 'Ablaciones: fracción del soporte, sujetos de preentrenamiento o épocas de ajuste fino.'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=KINDS)
        parser.add_argument('--methods', nargs='+', choices=Method.values)
        parser.add_argument('--fractions', type=float, nargs='+')
        parser.add_argument('--n-pretrain', dest='n_pretrain', type=int, nargs='+')
        parser.add_argument('--epochs', type=int, nargs='+')
        self.add_corpus_arguments(parser)
        self.add_output_arguments(parser)
        self.add_config_argument(parser)
        self.add_workers_argument(parser)

    def handle(self, *args, **options):
        config = self.load_config(options)
        seeds = options['seeds'] or list(config.seeds)
        kind = options['kind']
        common = {'seeds': seeds, 'config': config, 'workers': options['workers']}

        if kind == 'subjects':
            methods = options['methods'] or [m.value for m in PRETRAIN_METHODS]
            table = ablate_pretrain_subjects(self.load_corpus(options, config),
                                             n_pretrain=options['n_pretrain'] or config.n_pretrain,
                                             methods=methods, **common)
            name = 'ablate_subjects'
        else:
            methods = options['methods'] or [m.value for m in ALL_METHODS]
            split = self.load_split(options, config)
            if kind == 'fraction':
                table = ablate_support_fraction(split, fractions=options['fractions'] or config.fractions,
                                                methods=methods, **common)
            else:
                table = ablate_finetune_epochs(split, epochs=options['epochs'] or config.finetune_epochs,
                                               methods=methods, **common)
            name = '_'.join(filter(None, [f'ablate_{kind}', split.scenario.value, split.held_out]))

        out = Path(options['out'] or results_dir(name))
        self.emit(kind, table, out, config, options, methods=methods)
