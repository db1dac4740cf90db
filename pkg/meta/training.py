"""Entrenamiento supervisado: ajuste fino sobre un soporte y preentrenamiento convencional."""
import logging

import numpy as np

from dataio.types import WindowBatch
from nn.network import ArrayBatch, as_batch, batch_gradient, init_params
from nn.optim import AdamState, adam_step, sgd_step
from nn.params import ModelParams, NetworkConfig

from .config import InnerRule
from .exceptions import MetaConfigurationError

logger = logging.getLogger(__name__)

FINE_TUNE_LR = 5e-4
BATCH_SIZE = 64
CONVERGED_EPOCHS = 50


def _subset(data, indices):
    if isinstance(data, WindowBatch):
        return as_batch(data.take(indices))
    return ArrayBatch(data.inputs[indices], data.labels[indices])


def _as_dataset(windows):
    """Las WindowBatch quedan perezosas; cualquier otro lote se materializa."""
    return windows if isinstance(windows, WindowBatch) else as_batch(windows)


def supervised_train(theta: ModelParams, windows, epochs, lr, batch_size=BATCH_SIZE, seed=0, rule=InnerRule.ADAM):
    """Épocas de mini-lotes barajados con semilla; ``batch_size=None`` usa el lote completo sin barajar."""
    data = _as_dataset(windows)
    n = len(data)
    if n == 0:
        raise MetaConfigurationError('No hay ventanas para entrenar.', code='empty')
    if epochs < 1:
        raise MetaConfigurationError('Se requiere al menos una época.', code='epochs')
    rule = InnerRule(rule)
    rng = np.random.default_rng(seed)
    full = as_batch(data) if batch_size is None else None
    state = AdamState.zeros_like(theta) if rule == InnerRule.ADAM else None

    for _ in range(epochs):
        if full is not None:
            batches = [full]
        else:
            order = rng.permutation(n)
            batches = (_subset(data, np.sort(order[i:i + batch_size])) for i in range(0, n, batch_size))
        for batch in batches:
            grad = batch_gradient(theta, batch)
            if state is None:
                theta = sgd_step(theta, grad, lr)
            else:
                theta, state = adam_step(state, theta, grad, lr)
    return theta


def fine_tune(theta: ModelParams, support, epochs, lr=FINE_TUNE_LR, batch_size=BATCH_SIZE, seed=0,
              rule=InnerRule.ADAM):
    """Adapta θ al soporte de una tarea."""
    return supervised_train(theta, support, epochs, lr, batch_size=batch_size, seed=seed, rule=rule)


def conventional_pretrain(tasks, epochs=CONVERGED_EPOCHS, lr=FINE_TUNE_LR, seed=0, batch_size=BATCH_SIZE,
                          network: NetworkConfig = None, theta: ModelParams = None, rule=InnerRule.ADAM):
    """Entrena con la unión de soporte y consulta de todas las tareas como un solo conjunto."""
    tasks = list(tasks)
    if not tasks:
        raise MetaConfigurationError('No hay tareas para el preentrenamiento.', code='empty')
    windows = pooled_windows(tasks)
    if theta is None:
        network = network or NetworkConfig.for_windows(windows.window_length)
        theta = init_params(network, seed=seed)
    logger.info('Preentrenamiento convencional: %d tareas, %d ventanas, %d épocas', len(tasks), len(windows), epochs)
    return supervised_train(theta, windows, epochs, lr, batch_size=batch_size, seed=seed, rule=rule)


def pooled_windows(tasks) -> WindowBatch:
    batches = []
    for task in tasks:
        batches.extend([task.support, task.query])
    return WindowBatch.concatenate(batches)
