"""Adaptación interna, meta-gradiente a través del bucle desenrollado y meta-entrenamiento."""
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from nn.network import (
    ArrayBatch, as_batch, batch_loss, hessian_vector_product, init_params, loss_and_gradient, tree_sum,
)
from nn.optim import AdamState, adam_step, sgd_step
from nn.params import ModelParams, NetworkConfig

from .config import InnerRule, MetaConfig, MetaGradientKind, OuterRule, Reduction
from .exceptions import MetaConfigurationError

logger = logging.getLogger(__name__)


class ArrayTask(NamedTuple):
    """Tarea con soporte y consulta ya materializados (redes pequeñas, oráculos)."""

    support: ArrayBatch
    query: ArrayBatch
    task_id: str = ''


def _nonempty(batch, what):
    data = as_batch(batch)
    if len(data) == 0:
        raise MetaConfigurationError(f"El conjunto de {what} está vacío.", code='empty')
    return data


def inner_adapt(theta: ModelParams, support, alpha, inner_steps, inner_rule=InnerRule.SGD):
    """θ̂ tras M pasos de lote completo sobre la pérdida de soporte; θ no se modifica."""
    if inner_steps < 0:
        raise MetaConfigurationError('M debe ser ≥ 0.', code='steps')
    data = _nonempty(support, 'soporte')
    return _unroll(theta, data, alpha, inner_steps, InnerRule(inner_rule))[0]


def _unroll(theta, support, alpha, inner_steps, inner_rule):
    """Devuelve (θ̂, [θ_0, …, θ_{M-1}], pérdida de soporte en θ_0 o None)."""
    trajectory, current, support_loss = [], theta, None
    state = AdamState.zeros_like(theta) if inner_rule == InnerRule.ADAM else None
    for _ in range(inner_steps):
        trajectory.append(current)
        loss, grad = loss_and_gradient(current, support)
        if support_loss is None:
            support_loss = loss
        if state is None:
            current = sgd_step(current, grad, alpha)
        else:
            current, state = adam_step(state, current, grad, alpha)
    return current, trajectory, support_loss


@dataclass(frozen=True)
class TaskStep:
    gradient: object
    support_loss: float
    query_loss: float


def _task_step(theta, task, config: MetaConfig) -> TaskStep:
    support = _nonempty(task.support, 'soporte')
    query = _nonempty(task.query, 'consulta')
    adapted, trajectory, support_loss = _unroll(theta, support, config.alpha, config.inner_steps,
                                                config.inner_rule)
    query_loss, grad = loss_and_gradient(adapted, query)
    if support_loss is None:
        support_loss = batch_loss(theta, support)

    if config.meta_gradient == MetaGradientKind.SECOND_ORDER and config.alpha != 0:
        # λ_m = (I − α·H_s(θ_m)) λ_{m+1}, desde λ_M = ∇L_q(θ̂)
        for point in reversed(trajectory):
            grad = grad - hessian_vector_product(point, support, grad) * config.alpha
    return TaskStep(grad, support_loss, query_loss)


def meta_gradient(theta: ModelParams, task, config: MetaConfig):
    """∇θ de L_q(θ̂(θ)); en primer orden, ∇L_q evaluado en θ̂."""
    config.check_differentiable()
    return _task_step(theta, task, config).gradient


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    support_loss: float
    query_loss: float
    beta: float
    seconds: float


@dataclass
class TrainLog:
    seed: int
    entries: list = field(default_factory=list)

    def append(self, record: EpochRecord):
        self.entries.append(record)

    @property
    def wall_clock(self):
        return sum(entry.seconds for entry in self.entries)

    def records(self):
        return [{**asdict(entry), 'seed': self.seed} for entry in self.entries]

    def to_jsonl(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='\n') as fh:
            for record in self.records():
                fh.write(json.dumps(record, sort_keys=True) + '\n')
        return path

    @classmethod
    def from_jsonl(cls, path):
        lines = [json.loads(line) for line in Path(path).read_text(encoding='utf-8').splitlines() if line]
        log = cls(seed=lines[0]['seed'] if lines else 0)
        for line in lines:
            line.pop('seed')
            log.append(EpochRecord(**line))
        return log


def task_order_key(task):
    source = getattr(task, 'source', None)
    return (0, source) if source is not None else (1, getattr(task, 'task_id', ''))


def meta_train(tasks, config: MetaConfig, theta: ModelParams = None, network: NetworkConfig = None):
    """K épocas externas: una actualización por época con la suma de meta-gradientes por tarea.

    Sin ``theta`` se inicializa con la semilla de ``config``; la red por defecto
    se deduce de la longitud de ventana de las tareas.
    """
    tasks = list(tasks)
    if not tasks:
        raise MetaConfigurationError('No hay tareas de meta-entrenamiento.', code='empty')
    config.check_differentiable()
    tasks.sort(key=task_order_key)
    if theta is None:
        network = network or NetworkConfig.for_windows(tasks[0].support.window_length)
        theta = init_params(network, seed=config.seed)

    log = TrainLog(seed=config.seed)
    state = AdamState.zeros_like(theta)
    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for epoch in range(config.outer_epochs):
            started = time.monotonic()
            beta = config.beta_at(epoch)
            if executor is None:
                steps = [_task_step(theta, task, config) for task in tasks]
            else:
                steps = list(executor.map(lambda task: _task_step(theta, task, config), tasks))
            total = tree_sum([step.gradient for step in steps])
            if config.reduction == Reduction.MEAN:
                total = total * (1.0 / len(steps))

            if config.outer_rule == OuterRule.ADAM:
                theta, state = adam_step(state, theta, total, beta)
            else:
                theta = sgd_step(theta, total, beta)

            record = EpochRecord(
                epoch=epoch,
                support_loss=float(np.mean([s.support_loss for s in steps])),
                query_loss=float(np.mean([s.query_loss for s in steps])),
                beta=beta,
                seconds=time.monotonic() - started,
            )
            log.append(record)
            logger.info('Época %d/%d: consulta %.4f, soporte %.4f, β=%.6g', epoch + 1, config.outer_epochs,
                        record.query_loss, record.support_loss, beta)
    finally:
        if executor is not None:
            executor.shutdown()
    return theta, log
