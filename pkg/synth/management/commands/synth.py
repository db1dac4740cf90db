from harness.cli import ExperimentCommand, results_dir
from harness.manifest import directory_hash
from synth.generator import write_corpus


class Command(ExperimentCommand):
    help = 'Genera el corpus sintético de EMG (CSV por grabación y manifest.json).'

    def add_arguments(self, parser):
        parser.add_argument('--subjects', type=int, default=5)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default=str(results_dir('corpus')))
        self.add_config_argument(parser)
        self.add_workers_argument(parser)

    def handle(self, *args, **options):
        config = self.load_config(options)
        manifest = write_corpus(options['out'], options['subjects'], options['seed'], config.corpus,
                                workers=options['workers'])
        self.success(
            f"{len(manifest['recordings'])} grabaciones de {options['subjects']} sujetos en {options['out']} "
            f"(hash {directory_hash(options['out'])[:12]})"
        )
