"""Configuración de la red y vectores planos de parámetros / gradientes."""
from dataclasses import dataclass

import numpy as np

from dataio.types import N_CHANNELS

from .exceptions import ShapeError

ACTIVATIONS = ('relu', 'tanh')
FLATTEN_ORDER = 'channel-major'


@dataclass(frozen=True)
class NetworkConfig:
    """Arquitectura totalmente conectada; por defecto 1600 -> 512 -> 128 -> 3."""

    layer_sizes: tuple = (N_CHANNELS * 200, 512, 128, 3)
    activation: str = 'relu'
    init_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'layer_sizes', tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ShapeError(f"Tamaños de capa inválidos: {self.layer_sizes}.", code='layers')
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"Activación desconocida: {self.activation!r}.", code='activation')

    @classmethod
    def for_windows(cls, window_length, n_channels=N_CHANNELS, **kwargs):
        return cls(layer_sizes=(n_channels * window_length, 512, 128, 3), **kwargs)

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def n_classes(self):
        return self.layer_sizes[-1]

    @property
    def shapes(self):
        return [(n_out, n_in) for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]

    @property
    def n_params(self):
        return sum(n_out * n_in + n_out for n_out, n_in in self.shapes)

    def to_dict(self):
        return {'layer_sizes': list(self.layer_sizes), 'activation': self.activation, 'init_seed': self.init_seed}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Parámetros guardados en un único vector; las capas son vistas (W [salida, entrada], b)."""

    config: NetworkConfig
    vector: np.ndarray

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float64)
        if vector.shape != (self.config.n_params,):
            raise ShapeError(
                f"Se esperaban {self.config.n_params} parámetros, se recibieron {vector.shape}.",
                code='params',
            )
        object.__setattr__(self, 'vector', vector)

    def layers(self):
        out, offset = [], 0
        for n_out, n_in in self.config.shapes:
            weights = self.vector[offset:offset + n_out * n_in].reshape(n_out, n_in)
            offset += n_out * n_in
            bias = self.vector[offset:offset + n_out]
            offset += n_out
            out.append((weights, bias))
        return out

    def flatten(self):
        return self.vector.copy()

    @classmethod
    def unflatten(cls, config, vector):
        return cls(config, np.array(vector, dtype=np.float64, copy=True))

    @classmethod
    def from_layers(cls, config, layers):
        return cls(config, np.concatenate([np.concatenate([np.ravel(w), np.ravel(b)]) for w, b in layers]))

    @classmethod
    def zeros(cls, config):
        return cls(config, np.zeros(config.n_params))

    def copy(self):
        return type(self)(self.config, self.vector.copy())

    def _check(self, other):
        if self.config.layer_sizes != other.config.layer_sizes:
            raise ShapeError('Vectores de parámetros con arquitecturas distintas.', code='shape')
        return other.vector

    def __add__(self, other):
        return type(self)(self.config, self.vector + self._check(other))

    def __sub__(self, other):
        return type(self)(self.config, self.vector - self._check(other))

    def __mul__(self, scalar):
        return type(self)(self.config, self.vector * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.config, -self.vector)

    def dot(self, other):
        return float(self.vector @ self._check(other))

    def norm(self):
        return float(np.linalg.norm(self.vector))


class ModelParams(ParamVector):
    """θ: parámetros del clasificador de intención."""


class GradientVector(ParamVector):
    """Gradiente con la misma forma que ModelParams."""
