"""Ablaciones: fracción del soporte, número de sujetos de preentrenamiento y épocas de ajuste."""
import itertools
import logging

from tasks.splits import Scenario, ScenarioSplit, downsample_support

from .config import ExperimentConfig
from .evaluation import ResultTable, Variant, check_split, run_method
from .exceptions import ExperimentError
from .methods import Method, MethodSpec, build_learner

logger = logging.getLogger(__name__)

ALL_METHODS = tuple(Method)
PRETRAIN_METHODS = (Method.CONV_PRETRAIN_3, Method.METAEMG)


def ablate_support_fraction(split: ScenarioSplit, fractions=(0.25, 0.5, 0.75, 1.0), methods=ALL_METHODS, seeds=(0,),
                            config: ExperimentConfig = ExperimentConfig(), learner_factory=None, workers=1):
    """Una fila por (método, fracción): el soporte de cada tarea de prueba se reduce antes del ajuste."""
    check_split(split)
    fractions = tuple(float(f) for f in fractions)
    if not fractions or any(not 0 < f <= 1 for f in fractions):
        raise ExperimentError(f"Fracciones fuera de (0, 1]: {fractions}.", code='fraction')
    factory = learner_factory or build_learner

    def reducer(fraction):
        return lambda task, seed: downsample_support(task, fraction, seed=seed, mode=config.fraction_mode)

    records = []
    for method in methods:
        spec = MethodSpec.resolve(method, config)
        variants = [Variant(split.meta_test, {'fraction': f}, reducer(f)) for f in fractions]
        records += run_method(spec, split.meta_train, variants, seeds, config, factory(spec, config), workers)
        logger.info('Ablación de soporte: %s listo', spec.method)
    return ResultTable(records, split.scenario, seeds, params={'fractions': list(fractions),
                                                               'held_out': split.held_out}, keys=['fraction'])


def pretrain_partitions(subjects, n_pretrain):
    """Todas las elecciones de ``n`` sujetos de preentrenamiento y cada sujeto restante como prueba."""
    subjects = sorted(subjects)
    if n_pretrain < 1 or len(subjects) < n_pretrain + 1:
        raise ExperimentError(
            f"Se necesitan al menos {n_pretrain + 1} sujetos para preentrenar con {n_pretrain}; hay {len(subjects)}.",
            code='subjects',
        )
    partitions = []
    for chosen in itertools.combinations(subjects, n_pretrain):
        for held_out in subjects:
            if held_out not in chosen:
                partitions.append((chosen, held_out))
    return partitions


def ablate_pretrain_subjects(corpus, n_pretrain=(1, 2, 3, 4), methods=PRETRAIN_METHODS, seeds=(0,),
                             config: ExperimentConfig = ExperimentConfig(), learner_factory=None, workers=1):
    """Preentrena con n sujetos y adapta a cada sujeto no visto; promedia sobre todas las particiones."""
    tasks = sorted(corpus, key=lambda t: t.source)
    subjects = sorted({t.subject_id for t in tasks})
    by_subject = {s: tuple(t for t in tasks if t.subject_id == s) for s in subjects}
    factory = learner_factory or build_learner
    plan = {n: pretrain_partitions(subjects, n) for n in n_pretrain}

    records = []
    for method in methods:
        spec = MethodSpec.resolve(method, config)
        for n, partitions in plan.items():
            for chosen in sorted({p[0] for p in partitions}):
                meta_train = [t for s in chosen for t in by_subject[s]]
                variants = []
                for held_out in (h for c, h in partitions if c == chosen):
                    variants.append(Variant(by_subject[held_out], {
                        'n_pretrain': n, 'pretrain_subjects': '+'.join(chosen), 'held_out': held_out,
                    }))
                records += run_method(spec, meta_train, variants, seeds, config, factory(spec, config), workers)
            logger.info('Ablación de sujetos: %s con %d sujetos (%d particiones)', spec.method, n, len(partitions))
    return ResultTable(records, Scenario.SUBJECT, seeds, params={'n_pretrain': list(n_pretrain)},
                       keys=['n_pretrain'])


def ablate_finetune_epochs(split: ScenarioSplit, epochs=(1, 3, 5, 10, 25, 50), methods=ALL_METHODS, seeds=(0,),
                           config: ExperimentConfig = ExperimentConfig(), learner_factory=None, workers=1):
    """Precisión según las épocas de ajuste fino; el preentrenamiento se hace una vez por semilla."""
    check_split(split)
    epochs = tuple(int(e) for e in epochs)
    if not epochs or min(epochs) < 1:
        raise ExperimentError(f"Épocas inválidas: {epochs}.", code='epochs')
    factory = learner_factory or build_learner
    records = []
    for method in methods:
        spec = MethodSpec.resolve(method, config)
        variants = [Variant(split.meta_test, {'epochs': e}, epochs=e) for e in epochs]
        records += run_method(spec, split.meta_train, variants, seeds, config, factory(spec, config), workers)
    return ResultTable(records, split.scenario, seeds, params={'epochs': list(epochs), 'held_out': split.held_out},
                       keys=['epochs'])
