"""Cadena de preprocesamiento: recorte, reescalado y ventanas deslizantes."""
import dataclasses
import logging

import numpy as np

from .exceptions import PreconditionError, WindowingError
from .types import RawRecording, WindowBatch, WindowConfig

logger = logging.getLogger(__name__)

CLIP_LOW = 0.0
CLIP_HIGH = 1000.0


def clip_channels(rec: RawRecording) -> RawRecording:
    """Recorta cada valor a [0, 1000] para descartar valores atípicos."""
    return dataclasses.replace(rec, channels=np.clip(rec.channels, CLIP_LOW, CLIP_HIGH))


def rescale_channels(rec: RawRecording, mode: str = 'fixed') -> RawRecording:
    """Lleva cada canal a [-1, 1].

    ``fixed`` aplica c -> c/500 - 1 igual para todas las sesiones; ``minmax``
    usa el mínimo y máximo de cada canal de la grabación (solo para estudios de
    sensibilidad). Un canal constante queda en 0.
    """
    channels = rec.channels
    if channels.size and (channels.min() < CLIP_LOW or channels.max() > CLIP_HIGH):
        raise PreconditionError(
            'El reescalado requiere valores recortados a [0, 1000].',
            code='not_clipped',
        )

    if mode == 'fixed':
        scaled = channels / 500.0 - 1.0
    elif mode == 'minmax':
        low = channels.min(axis=0)
        span = channels.max(axis=0) - low
        safe = np.where(span > 0, span, 1.0)
        scaled = np.where(span > 0, 2.0 * (channels - low) / safe - 1.0, 0.0)
    else:
        raise PreconditionError(f"Modo de reescalado desconocido: {mode!r}.", code='mode')
    return dataclasses.replace(rec, channels=scaled)


def window(rec: RawRecording, window_seconds: float = 2.0, stride_ms: float = 10.0) -> WindowBatch:
    """Ventanas de ``window_seconds`` que terminan en W-1, W-1+s, W-1+2s, ...

    La etiqueta de cada ventana es la señal verbal en su última muestra.
    """
    config = WindowConfig(window_seconds=window_seconds, stride_ms=stride_ms)
    length = config.window_length(rec.sample_rate_hz)
    stride = config.stride(rec.sample_rate_hz)

    if rec.n_samples < length:
        raise WindowingError(
            f"La grabación tiene {rec.n_samples} muestras; se necesitan al menos {length}.",
            code='empty',
        )
    if rec.channels.min() < -1.0 or rec.channels.max() > 1.0:
        raise PreconditionError('Las ventanas requieren una grabación reescalada a [-1, 1].', code='not_rescaled')

    t_end = np.arange(length - 1, rec.n_samples, stride, dtype=np.int64)
    signal = np.ascontiguousarray(rec.channels.T)
    return WindowBatch.from_signal(
        signal,
        t_end=t_end,
        labels=rec.cues[t_end].astype(np.int64),
        window_length=length,
        source=rec.source,
    )


def window_count(n_samples: int, length: int, stride: int) -> int:
    return (n_samples - length) // stride + 1


def preprocess(rec: RawRecording, config: WindowConfig = WindowConfig()) -> WindowBatch:
    """Recorte, reescalado y ventanas en una sola llamada."""
    scaled = rescale_channels(clip_channels(rec), mode=config.rescale)
    batch = window(scaled, config.window_seconds, config.stride_ms)
    logger.debug('%s: %d ventanas', rec.recording_id or rec.subject_id, len(batch))
    return batch
