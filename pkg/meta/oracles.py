"""Oráculos del meta-gradiente: diferencias finitas del objetivo desenrollado y forma cerrada con M = 1."""
import logging

import numpy as np

from nn.gradcheck import (
    OracleReport, central_difference, full_gradient_suite, random_batch, relative_error, tiny_gradient_suite,
)
from nn.network import batch_gradient, batch_loss
from nn.params import GradientVector, ModelParams, NetworkConfig

from .config import MetaConfig
from .learning import ArrayTask, inner_adapt, meta_gradient

logger = logging.getLogger(__name__)

TINY_LAYERS = (6, 5, 4, 3)
CLOSED_FORM_LAYERS = (4, 4, 3, 3)


def random_task(rng, input_dim, size=8):
    return ArrayTask(random_batch(rng, input_dim, size), random_batch(rng, input_dim, size))


def adapted_query_loss(config: MetaConfig, network, task):
    """θ ↦ L_q(inner_adapt(θ)) como función de un vector plano."""
    def objective(vector):
        adapted = inner_adapt(ModelParams(network, vector), task.support, config.alpha, config.inner_steps)
        return batch_loss(adapted, task.query)
    return objective


def meta_gradient_suite(trials=10, n_coordinates=50, inner_steps=(1, 2), alpha=0.1, h=1e-5, threshold=1e-5,
                        seed=0, layer_sizes=TINY_LAYERS):
    """Segundo orden contra diferencias centrales, con tanh para evitar quiebres."""
    rng = np.random.default_rng(seed)
    network = NetworkConfig(layer_sizes=layer_sizes, activation='tanh')
    worst, checked = 0.0, 0
    for trial in range(trials):
        config = MetaConfig(alpha=alpha, inner_steps=inner_steps[trial % len(inner_steps)])
        theta = ModelParams(network, rng.normal(0.0, 0.5, size=network.n_params))
        task = random_task(rng, network.input_dim)
        coords = np.sort(rng.choice(network.n_params, size=min(n_coordinates, network.n_params), replace=False))
        analytic = meta_gradient(theta, task, config).vector[coords]
        estimate = central_difference(adapted_query_loss(config, network, task), theta.vector, h, coords)
        worst = max(worst, relative_error(analytic, estimate))
        checked += int(coords.size)
    report = OracleReport('meta_gradient/second_order', worst, threshold, checked)
    logger.info('%s: error relativo máximo %.3e en %d coordenadas', report.name, worst, checked)
    return report


def explicit_hessian(theta: ModelParams, batch, h=1e-5):
    """Hessiano por diferencias centrales de batch_gradient, simetrizado."""
    n = theta.config.n_params
    columns = np.empty((n, n))
    for j in range(n):
        step = GradientVector(theta.config, np.eye(1, n, j).ravel() * h)
        columns[:, j] = (batch_gradient(theta + step, batch).vector
                         - batch_gradient(theta - step, batch).vector) / (2.0 * h)
    return 0.5 * (columns + columns.T)


def closed_form_suite(trials=5, alpha=0.1, threshold=1e-6, seed=0, layer_sizes=CLOSED_FORM_LAYERS):
    """Con M = 1 el meta-gradiente es (I − α·H_s(θ))·∇L_q(θ̂)."""
    rng = np.random.default_rng(seed)
    network = NetworkConfig(layer_sizes=layer_sizes, activation='tanh')
    config = MetaConfig(alpha=alpha, inner_steps=1)
    worst = 0.0
    for _ in range(trials):
        theta = ModelParams(network, rng.normal(0.0, 0.5, size=network.n_params))
        task = random_task(rng, network.input_dim)
        adapted = inner_adapt(theta, task.support, alpha, 1)
        hessian = explicit_hessian(theta, task.support)
        query_grad = batch_gradient(adapted, task.query).vector
        expected = query_grad - alpha * hessian @ query_grad
        worst = max(worst, relative_error(meta_gradient(theta, task, config).vector, expected))
    report = OracleReport('meta_gradient/closed_form', worst, threshold, trials * network.n_params)
    logger.info('%s: error relativo máximo %.3e', report.name, worst)
    return report


def run_suites(full=True):
    """Todas las suites de nn y meta, en orden fijo."""
    reports = [tiny_gradient_suite(), meta_gradient_suite(), closed_form_suite()]
    if full:
        reports.insert(1, full_gradient_suite())
    return reports
