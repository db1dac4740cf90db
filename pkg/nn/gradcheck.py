"""Oráculos de diferencias finitas para el gradiente analítico."""
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import OracleError
from .network import ArrayBatch, as_batch, batch_gradient, batch_loss, hidden_margin, init_params
from .params import GradientVector, ModelParams, NetworkConfig

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-3
KINK_MARGIN = 1e-4
TINY_LAYERS = (12, 8, 5, 3)


def relative_error(analytic, estimate, floor=RELATIVE_FLOOR):
    """Máximo de |a−b| / max(|a|, |b|, floor) por coordenada."""
    a = np.asarray(analytic, dtype=np.float64)
    b = np.asarray(estimate, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def central_difference(fn, vector, h, coordinates=None):
    """(f(v + h·e_j) − f(v − h·e_j)) / 2h para cada coordenada pedida."""
    if not h > 0:
        raise OracleError(f"El paso h debe ser positivo (h={h}).", code='step')
    vector = np.asarray(vector, dtype=np.float64)
    coords = np.arange(vector.size) if coordinates is None else np.asarray(coordinates, dtype=np.int64)
    shifted = vector.copy()
    out = np.empty(coords.size)
    for i, j in enumerate(coords):
        original = shifted[j]
        shifted[j] = original + h
        upper = fn(shifted)
        shifted[j] = original - h
        lower = fn(shifted)
        shifted[j] = original
        out[i] = (upper - lower) / (2.0 * h)
    return out


def fd_gradient(params: ModelParams, batch, h, coordinates=None):
    """Estimación central de ∇ de batch_loss.

    Sin ``coordinates`` devuelve un GradientVector completo; con ellas, el arreglo
    de estimaciones en ese orden.
    """
    data = as_batch(batch)
    config = params.config
    estimate = central_difference(lambda v: batch_loss(ModelParams(config, v), data), params.vector, h, coordinates)
    if coordinates is None:
        return GradientVector(config, estimate)
    return estimate


@dataclass(frozen=True)
class OracleReport:
    name: str
    max_relative_error: float
    threshold: float
    checked: int

    @property
    def passed(self):
        return bool(self.max_relative_error < self.threshold)

    def to_dict(self):
        return {**asdict(self), 'passed': self.passed}


def random_batch(rng, input_dim, size, n_classes=3):
    return ArrayBatch(rng.uniform(-1.0, 1.0, size=(size, input_dim)), rng.integers(0, n_classes, size=size))


def away_from_kinks(params, rng, input_dim, size, attempts=50):
    """Lote aleatorio cuyas preactivaciones ocultas no están cerca de cero."""
    for _ in range(attempts):
        batch = random_batch(rng, input_dim, size, params.config.n_classes)
        if params.config.activation != 'relu' or hidden_margin(params, batch) > KINK_MARGIN:
            return batch
    raise OracleError('No se encontró un lote lejos de los quiebres de la ReLU.', code='kink')


def tiny_gradient_suite(trials=20, h=1e-5, threshold=1e-6, seed=0, layer_sizes=TINY_LAYERS):
    """Redes pequeñas, todas las coordenadas, alternando ReLU y tanh."""
    rng = np.random.default_rng(seed)
    worst, checked = 0.0, 0
    for trial in range(trials):
        config = NetworkConfig(layer_sizes=layer_sizes, activation='relu' if trial % 2 == 0 else 'tanh')
        params = ModelParams(config, rng.normal(0.0, 0.5, size=config.n_params))
        batch = away_from_kinks(params, rng, config.input_dim, size=6)
        analytic = batch_gradient(params, batch).vector
        estimate = fd_gradient(params, batch, h).vector
        worst = max(worst, relative_error(analytic, estimate))
        checked += config.n_params
    report = OracleReport('gradient/tiny', worst, threshold, checked)
    logger.info('%s: error relativo máximo %.3e en %d coordenadas', report.name, worst, checked)
    return report


def full_gradient_suite(n_coordinates=100, h=1e-5, threshold=1e-5, seed=0, config=None, batch_size=4):
    """Red completa: coordenadas muestreadas al azar de θ."""
    config = config or NetworkConfig()
    rng = np.random.default_rng(seed)
    params = init_params(config, seed=seed)
    batch = away_from_kinks(params, rng, config.input_dim, size=batch_size)
    coords = np.sort(rng.choice(config.n_params, size=min(n_coordinates, config.n_params), replace=False))
    analytic = batch_gradient(params, batch).vector[coords]
    estimate = fd_gradient(params, batch, h, coordinates=coords)
    report = OracleReport('gradient/full', relative_error(analytic, estimate), threshold, int(coords.size))
    logger.info('%s: error relativo máximo %.3e en %d coordenadas', report.name, report.max_relative_error,
                report.checked)
    return report
