"""Los cinco métodos comparados y el aprendiz que los ejecuta."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Protocol

from django.db import models

from meta.learning import meta_train
from meta.training import conventional_pretrain, fine_tune
from nn.network import init_params, predict_labels

from .config import ExperimentConfig

logger = logging.getLogger(__name__)


class Method(models.TextChoices):
    NO_PRETRAIN_3 = 'NoPretrain3', 'Sin preentrenamiento (3 épocas)'
    NO_PRETRAIN_CONVERGED = 'NoPretrainConverged', 'Sin preentrenamiento (convergido)'
    CONV_PRETRAIN_3 = 'ConvPretrain3', 'Preentrenamiento convencional (3 épocas)'
    CONV_PRETRAIN_CONVERGED = 'ConvPretrainConverged', 'Preentrenamiento convencional (convergido)'
    METAEMG = 'MetaEMG', 'MetaEMG'


class Pretraining(models.TextChoices):
    NONE = 'none', 'Ninguno'
    CONVENTIONAL = 'conventional', 'Convencional'
    META = 'meta', 'Meta-aprendizaje'


PRETRAINING = {
    Method.NO_PRETRAIN_3: Pretraining.NONE,
    Method.NO_PRETRAIN_CONVERGED: Pretraining.NONE,
    Method.CONV_PRETRAIN_3: Pretraining.CONVENTIONAL,
    Method.CONV_PRETRAIN_CONVERGED: Pretraining.CONVENTIONAL,
    Method.METAEMG: Pretraining.META,
}
CONVERGED = {Method.NO_PRETRAIN_CONVERGED, Method.CONV_PRETRAIN_CONVERGED}


@dataclass(frozen=True)
class MethodSpec:
    method: Method
    fine_tune_epochs: int
    pretraining: Pretraining

    @classmethod
    def resolve(cls, method, config: ExperimentConfig = ExperimentConfig()):
        method = Method(method)
        epochs = config.converged_epochs if method in CONVERGED else config.short_epochs
        return cls(method, epochs, PRETRAINING[method])

    def to_dict(self):
        return {'method': self.method.value, 'fine_tune_epochs': self.fine_tune_epochs,
                'pretraining': self.pretraining.value}


class Learner(Protocol):
    def pretrain(self, tasks, seed):
        """Devuelve el estado base tras preentrenar con las tareas de meta-entrenamiento."""

    def adapt_and_predict(self, base, task, seed, epochs=None):
        """Etiquetas predichas para la consulta de ``task`` tras adaptarse a su soporte."""


class NetworkLearner:
    """Preentrena según el método y ajusta sobre el soporte con la regla configurada.

    ``base_params`` (unos parámetros, o un dict semilla -> parámetros) reemplaza
    el preentrenamiento, como cuando se evalúa un checkpoint.
    """

    def __init__(self, spec: MethodSpec, config: ExperimentConfig, base_params=None):
        self.spec = spec
        self.config = config
        self.base_params = base_params

    def network(self, tasks):
        return self.config.network_for(tasks[0].support.window_length)

    def pretrain(self, tasks, seed):
        if isinstance(self.base_params, dict):
            return self.base_params[seed]
        if self.base_params is not None:
            return self.base_params
        tasks = list(tasks)
        network = self.network(tasks)
        if self.spec.pretraining == Pretraining.NONE:
            return init_params(network, seed=seed)
        if self.spec.pretraining == Pretraining.CONVENTIONAL:
            return conventional_pretrain(
                tasks,
                epochs=self.config.pretrain_epochs,
                lr=self.config.pretrain_lr,
                seed=seed,
                batch_size=self.config.pretrain_batch,
                network=network,
            )
        meta_config = dataclasses.replace(self.config.meta, seed=seed)
        theta, log = meta_train(tasks, meta_config, network=network)
        logger.info('%s semilla %d: meta-entrenamiento en %.1f s', self.spec.method, seed, log.wall_clock)
        return theta

    def adapt_and_predict(self, base, task, seed, epochs=None):
        adapted = fine_tune(
            base,
            task.support,
            epochs or self.spec.fine_tune_epochs,
            lr=self.config.fine_tune_lr,
            batch_size=self.config.fine_tune_batch,
            seed=seed,
            rule=self.config.fine_tune_rule,
        )
        return predict_labels(adapted, task.query)


def build_learner(spec: MethodSpec, config: ExperimentConfig, base_params=None) -> Learner:
    return NetworkLearner(spec, config, base_params)
