import dataclasses
from pathlib import Path

from harness.cli import ExperimentCommand, results_dir
from harness.manifest import run_manifest, write_manifest
from harness.methods import Method, MethodSpec, Pretraining, build_learner
from meta.learning import meta_train
from nn.checkpoint import save_checkpoint

CHECKPOINT_NAME = 'theta.ckpt'
LOG_NAME = 'train.jsonl'


class Command(ExperimentCommand):
    help = 'Preentrena un método sobre el meta-entrenamiento de un escenario y guarda θ.'

    def add_arguments(self, parser):
        parser.add_argument('--method', choices=Method.values, default=Method.METAEMG)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', help='Carpeta de salida (por defecto results/train/<método>_<escenario>_s<semilla>).')
        self.add_corpus_arguments(parser)
        self.add_config_argument(parser)
        self.add_workers_argument(parser)

    def handle(self, *args, **options):
        config = self.load_config(options)
        split = self.load_split(options, config)
        spec = MethodSpec.resolve(options['method'], config)
        seed = options['seed']

        name = '_'.join(filter(None, [spec.method.value, split.scenario.value, split.held_out, f's{seed}']))
        out = Path(options['out'] or results_dir('train', name))

        log = None
        if spec.pretraining == Pretraining.META:
            network = config.network_for(split.meta_train[0].support.window_length)
            theta, log = meta_train(split.meta_train, dataclasses.replace(config.meta, seed=seed), network=network)
        else:
            theta = build_learner(spec, config).pretrain(split.meta_train, seed)

        checkpoint = save_checkpoint(theta, out / CHECKPOINT_NAME, extra={
            **spec.to_dict(), 'scenario': split.scenario.value, 'held_out': split.held_out, 'seed': seed,
        })
        if log is not None:
            log.to_jsonl(out / LOG_NAME)
        write_manifest(out, run_manifest(
            'train', config, seeds=[seed], corpus=options['corpus'], config_file=options.get('config'),
            method=spec.to_dict(),
            split=split.to_manifest()['counts'], checkpoint=checkpoint.name,
        ))
        self.success(f"{spec.method} entrenado sobre {len(split.meta_train)} tareas: {checkpoint}")
