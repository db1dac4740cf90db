"""Perceptrón multicapa con retropropagación y productos Hessiano-vector exactos.

El gradiente se calcula en modo reverso y el producto H·v con el operador R
(derivada direccional de la pasada hacia atrás). Ambos promedian sobre el lote
y acumulan por bloques de tamaño fijo con una reducción en árbol, así que el
resultado no depende del orden de ejecución.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from dataio.types import IntentDistribution, WindowBatch, WindowedSample

from .exceptions import ShapeError
from .params import GradientVector, ModelParams, NetworkConfig

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 256


@dataclass(frozen=True, eq=False)
class ArrayBatch:
    """Lote ya materializado: entradas [N, D] y etiquetas [N]."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if inputs.shape[0] != labels.shape[0]:
            raise ShapeError('Entradas y etiquetas con distinto número de filas.', code='batch')
        object.__setattr__(self, 'inputs', inputs)
        object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return int(self.labels.shape[0])


def as_batch(batch) -> ArrayBatch:
    """Acepta WindowBatch, ArrayBatch, una tupla (X, y) o una lista de WindowedSample."""
    if isinstance(batch, ArrayBatch):
        return batch
    if isinstance(batch, WindowBatch):
        return ArrayBatch(batch.inputs(), batch.labels)
    if isinstance(batch, tuple) and len(batch) == 2 and not isinstance(batch[0], WindowedSample):
        return ArrayBatch(*batch)
    samples = list(batch)
    if samples and all(isinstance(s, WindowedSample) for s in samples):
        return ArrayBatch(np.stack([s.flatten() for s in samples]), [int(s.label) for s in samples])
    raise ShapeError('Lote vacío o de tipo desconocido.', code='batch')


def chunk_size():
    return int(getattr(settings, 'METAEMG', {}).get('CHUNK_SIZE', DEFAULT_CHUNK_SIZE))


# =======================================
# ACTIVACIONES
# =======================================
def _relu(z):
    return np.maximum(z, 0.0)


def _relu_prime(z):
    return (z > 0).astype(np.float64)


def _relu_second(z):
    return np.zeros_like(z)


def _tanh_prime(z):
    return 1.0 - np.tanh(z) ** 2


def _tanh_second(z):
    t = np.tanh(z)
    return -2.0 * t * (1.0 - t ** 2)


ACTIVATION_FUNCTIONS = {
    'relu': (_relu, _relu_prime, _relu_second),
    'tanh': (np.tanh, _tanh_prime, _tanh_second),
}


def init_params(config: NetworkConfig, seed=None) -> ModelParams:
    """Pesos Glorot uniformes y sesgos en cero."""
    rng = np.random.default_rng(config.init_seed if seed is None else seed)
    layers = []
    for n_out, n_in in config.shapes:
        limit = np.sqrt(6.0 / (n_in + n_out))
        layers.append((rng.uniform(-limit, limit, size=(n_out, n_in)), np.zeros(n_out)))
    return ModelParams.from_layers(config, layers)


def _check_inputs(params, inputs):
    if inputs.shape[-1] != params.config.input_dim:
        raise ShapeError(
            f"La red espera {params.config.input_dim} entradas, se recibieron {inputs.shape[-1]}.",
            code='input',
        )


def _forward(layers, inputs, activation):
    """Devuelve los logits y, por capa, (activación previa, preactivación)."""
    act = ACTIVATION_FUNCTIONS[activation][0]
    cache, a = [], inputs
    last = len(layers) - 1
    for i, (weights, bias) in enumerate(layers):
        z = a @ weights.T + bias
        cache.append((a, z))
        a = z if i == last else act(z)
    return a, cache


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _log_sum_exp(logits):
    top = logits.max(axis=-1)
    return top + np.log(np.exp(logits - top[..., None]).sum(axis=-1))


def _one_hot(labels, n_classes):
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def forward(params: ModelParams, x):
    """Logits para una ventana ([3]) o para una matriz de entradas ([N, 3])."""
    if isinstance(x, WindowedSample):
        x = x.flatten()
    elif isinstance(x, (WindowBatch, ArrayBatch)):
        x = as_batch(x).inputs
    x = np.asarray(x, dtype=np.float64)
    _check_inputs(params, x)
    logits, _ = _forward(params.layers(), np.atleast_2d(x), params.config.activation)
    return logits[0] if x.ndim == 1 else logits


def predict_proba(params: ModelParams, batch):
    return _softmax(forward(params, as_batch(batch).inputs))


def predict_labels(params: ModelParams, batch):
    return np.argmax(predict_proba(params, batch), axis=1)


def predict(params: ModelParams, x: WindowedSample) -> IntentDistribution:
    probs = _softmax(forward(params, x))
    probs = probs / probs.sum()
    return IntentDistribution(*(float(p) for p in probs))


def accuracy(params: ModelParams, batch):
    data = as_batch(batch)
    return float(np.mean(predict_labels(params, data) == data.labels))


# =======================================
# PÉRDIDA, GRADIENTE Y HESSIANO-VECTOR
# =======================================
def _chunks(n, size):
    return [slice(start, min(start + size, n)) for start in range(0, n, size)]


def tree_sum(parts):
    """Suma por pares en orden fijo."""
    parts = list(parts)
    while len(parts) > 1:
        paired = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            paired.append(parts[-1])
        parts = paired
    return parts[0]


def _loss_sum(layers, inputs, labels, activation):
    logits, _ = _forward(layers, inputs, activation)
    return float(np.sum(_log_sum_exp(logits) - logits[np.arange(labels.shape[0]), labels]))


def _gradient_sum(layers, inputs, labels, activation):
    """Pérdida y gradiente sumados (sin promediar) sobre un bloque."""
    prime = ACTIVATION_FUNCTIONS[activation][1]
    logits, cache = _forward(layers, inputs, activation)
    loss = float(np.sum(_log_sum_exp(logits) - logits[np.arange(labels.shape[0]), labels]))
    delta = _softmax(logits) - _one_hot(labels, logits.shape[1])

    grads = [None] * len(layers)
    for l in range(len(layers) - 1, -1, -1):
        a_prev, _ = cache[l]
        grads[l] = (delta.T @ a_prev, delta.sum(axis=0))
        if l > 0:
            delta = (delta @ layers[l][0]) * prime(cache[l - 1][1])
    flat = np.concatenate([np.concatenate([dw.ravel(), db]) for dw, db in grads])
    return np.concatenate([[loss], flat])


def _hvp_sum(layers, directions, inputs, labels, activation):
    """Producto H·v sumado sobre un bloque, con el operador R sobre la retropropagación."""
    _, prime, second = ACTIVATION_FUNCTIONS[activation]
    logits, cache = _forward(layers, inputs, activation)
    last = len(layers) - 1

    # pasada R hacia adelante
    r_acts, r_pre = [None] * len(layers), [None] * len(layers)
    r_a = None
    for l, ((weights, _), (v_w, v_b)) in enumerate(zip(layers, directions)):
        a_prev, z = cache[l]
        r_acts[l] = r_a
        r_z = a_prev @ v_w.T + v_b
        if r_a is not None:
            r_z = r_z + r_a @ weights.T
        r_pre[l] = r_z
        if l < last:
            r_a = prime(z) * r_z

    probs = _softmax(logits)
    r_logits = r_pre[last]
    delta = probs - _one_hot(labels, logits.shape[1])
    r_delta = probs * (r_logits - np.sum(probs * r_logits, axis=1, keepdims=True))

    out = [None] * len(layers)
    for l in range(last, -1, -1):
        a_prev, _ = cache[l]
        h_w = r_delta.T @ a_prev
        if r_acts[l] is not None:
            h_w = h_w + delta.T @ r_acts[l]
        out[l] = (h_w, r_delta.sum(axis=0))
        if l > 0:
            weights, v_w = layers[l][0], directions[l][0]
            z_prev = cache[l - 1][1]
            back = delta @ weights
            r_back = r_delta @ weights + delta @ v_w
            r_delta = r_back * prime(z_prev) + back * second(z_prev) * r_pre[l - 1]
            delta = back * prime(z_prev)
    return np.concatenate([np.concatenate([hw.ravel(), hb]) for hw, hb in out])


def _chunked_mean(fn, data, size):
    size = size or chunk_size()
    n = len(data)
    if n == 0:
        raise ShapeError('No se puede promediar sobre un lote vacío.', code='empty')
    parts = [fn(data.inputs[s], data.labels[s]) for s in _chunks(n, size)]
    return tree_sum(parts) / n


def batch_loss(params: ModelParams, batch, chunk=None) -> float:
    """Entropía cruzada promedio sobre el lote."""
    data = as_batch(batch)
    _check_inputs(params, data.inputs)
    layers, activation = params.layers(), params.config.activation
    return float(_chunked_mean(lambda x, y: _loss_sum(layers, x, y, activation), data, chunk))


def loss_and_gradient(params: ModelParams, batch, chunk=None):
    data = as_batch(batch)
    _check_inputs(params, data.inputs)
    layers, activation = params.layers(), params.config.activation
    total = _chunked_mean(lambda x, y: _gradient_sum(layers, x, y, activation), data, chunk)
    return float(total[0]), GradientVector(params.config, total[1:])


def batch_gradient(params: ModelParams, batch, chunk=None) -> GradientVector:
    """∇θ de la entropía cruzada promedio."""
    return loss_and_gradient(params, batch, chunk)[1]


def hessian_vector_product(params: ModelParams, batch, direction, chunk=None) -> GradientVector:
    """H(θ)·v exacto de la pérdida promedio, sin formar el Hessiano."""
    data = as_batch(batch)
    _check_inputs(params, data.inputs)
    if direction.config.layer_sizes != params.config.layer_sizes:
        raise ShapeError('La dirección no tiene la forma de los parámetros.', code='shape')
    layers, directions, activation = params.layers(), direction.layers(), params.config.activation
    total = _chunked_mean(lambda x, y: _hvp_sum(layers, directions, x, y, activation), data, chunk)
    return GradientVector(params.config, total)


def hidden_margin(params: ModelParams, batch):
    """Menor |preactivación| oculta del lote; cerca de 0 la ReLU no es diferenciable."""
    data = as_batch(batch)
    _, cache = _forward(params.layers(), data.inputs, params.config.activation)
    return float(min(np.abs(z).min() for _, z in cache[:-1])) if len(cache) > 1 else np.inf
