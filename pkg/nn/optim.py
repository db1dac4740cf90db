from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError
from .params import ModelParams


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls(np.zeros_like(params.vector), np.zeros_like(params.vector), 0)


def adam_step(state: AdamState, params: ModelParams, grad, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Un paso de Adam; devuelve ``(parámetros, estado)`` nuevos sin tocar los de entrada."""
    if grad.vector.shape != params.vector.shape or state.m.shape != params.vector.shape:
        raise ShapeError('Gradiente, estado y parámetros con formas distintas.', code='shape')
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad.vector
    v = beta2 * state.v + (1.0 - beta2) * grad.vector ** 2
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    updated = params.vector - lr * m_hat / (np.sqrt(v_hat) + eps)
    return type(params)(params.config, updated), AdamState(m, v, t)


def sgd_step(params: ModelParams, grad, lr):
    return params - grad * lr
