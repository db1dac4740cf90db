from dataclasses import dataclass, field

import numpy as np
from django.db import models
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import PreconditionError, WindowingError

N_CHANNELS = 8


# =======================================
# OPCIONES DE ELECCIÓN
# =======================================
class Intent(models.IntegerChoices):
    """Intención de la mano; el valor entero es el índice de clase del clasificador."""

    RELAX = 0, 'Relajar'
    OPEN = 1, 'Abrir'
    CLOSE = 2, 'Cerrar'

    @property
    def token(self):
        return self.name.lower()

    @classmethod
    def from_token(cls, token):
        return cls[token.upper()]


CUE_TOKENS = {intent.token: intent for intent in Intent}


class Condition(models.TextChoices):
    """Condición de uso de la órtesis; el valor es el token del archivo CSV."""

    ARM_ON_MOTOR_OFF = 'on_off', 'Brazo en mesa, motor apagado'
    ARM_ON_MOTOR_ON = 'on_on', 'Brazo en mesa, motor encendido'
    ARM_OFF_MOTOR_OFF = 'off_off', 'Brazo fuera de mesa, motor apagado'
    ARM_OFF_MOTOR_ON = 'off_on', 'Brazo fuera de mesa, motor encendido'

    @property
    def motor_on(self):
        return self.value.endswith('_on')

    @property
    def arm_off_table(self):
        return self.value.startswith('off_')


# =======================================
# CONFIGURACIÓN DE VENTANAS
# =======================================
@dataclass(frozen=True)
class WindowConfig:
    window_seconds: float = 2.0
    stride_ms: float = 10.0
    # 'fixed' = mapa afín [0, 1000] -> [-1, 1]; 'minmax' = por grabación y canal
    rescale: str = 'fixed'

    def __post_init__(self):
        if self.window_seconds <= 0 or self.stride_ms <= 0:
            raise WindowingError('La ventana y el paso deben ser positivos.', code='config')
        if self.rescale not in ('fixed', 'minmax'):
            raise WindowingError(f"Modo de reescalado desconocido: {self.rescale!r}.", code='config')

    def window_length(self, sample_rate_hz):
        return _as_samples(self.window_seconds * sample_rate_hz, 'ventana')

    def stride(self, sample_rate_hz):
        return _as_samples(self.stride_ms * sample_rate_hz / 1000.0, 'paso')

    def to_dict(self):
        return {
            'window_seconds': self.window_seconds,
            'stride_ms': self.stride_ms,
            'rescale': self.rescale,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _as_samples(value, what):
    samples = round(value)
    if samples < 1 or abs(value - samples) > 1e-9:
        raise WindowingError(
            f"El {what} equivale a {value} muestras; debe ser un entero positivo.",
            code='config',
        )
    return int(samples)


# =======================================
# GRABACIONES
# =======================================
@dataclass(frozen=True, eq=False)
class RawRecording:
    """Serie de EMG de 8 canales sin interrupciones, con la señal verbal por muestra."""

    subject_id: str
    day: int
    condition: Condition
    sample_rate_hz: int
    channels: np.ndarray  # [n_samples, 8]
    cues: np.ndarray  # [n_samples], valores de Intent
    recording_id: str = ''
    repetition: int = 0

    def __post_init__(self):
        channels = np.asarray(self.channels, dtype=np.float64)
        cues = np.asarray(self.cues, dtype=np.int8)
        object.__setattr__(self, 'channels', channels)
        object.__setattr__(self, 'cues', cues)
        object.__setattr__(self, 'condition', Condition(self.condition))

        if self.day not in (1, 2):
            raise PreconditionError(f"Día inválido: {self.day}.", code='day')
        if self.sample_rate_hz <= 0:
            raise PreconditionError('La frecuencia de muestreo debe ser positiva.', code='rate')
        if channels.ndim != 2 or channels.shape[1] != N_CHANNELS:
            raise PreconditionError(
                f"Se esperaban {N_CHANNELS} canales, se recibió la forma {channels.shape}.",
                code='channels',
            )
        if channels.shape[0] != cues.shape[0]:
            raise PreconditionError('El número de filas no coincide con el de señales.', code='length')
        if cues.size and (cues.min() < 0 or cues.max() > 2):
            raise PreconditionError('Señal verbal fuera del rango de intenciones.', code='cue')

    @property
    def n_samples(self):
        return self.channels.shape[0]

    @property
    def source(self):
        return (self.subject_id, self.day, self.condition.value)

    def runs(self):
        return cue_runs(self.cues)

    def motion_counts(self):
        """Número de tramos de apertura y de cierre."""
        labels = [intent for intent, _, _ in self.runs()]
        return labels.count(Intent.OPEN), labels.count(Intent.CLOSE)

    def has_three_motions(self):
        return self.motion_counts() == (3, 3)


def cue_runs(cues):
    """Tramos contiguos de la señal verbal como (intención, inicio, fin inclusivo)."""
    cues = np.asarray(cues)
    if cues.size == 0:
        return []
    edges = np.flatnonzero(np.diff(cues)) + 1
    starts = np.concatenate(([0], edges))
    stops = np.concatenate((edges - 1, [cues.size - 1]))
    return [(Intent(int(cues[s])), int(s), int(e)) for s, e in zip(starts, stops)]


# =======================================
# VENTANAS Y PREDICCIONES
# =======================================
@dataclass(frozen=True, eq=False)
class WindowedSample:
    x: np.ndarray  # [8, W] en [-1, 1]
    label: Intent
    t_end: int

    def __post_init__(self):
        if np.any(np.abs(self.x) > 1.0):
            raise PreconditionError('La ventana tiene valores fuera de [-1, 1].', code='range')

    def flatten(self):
        """Orden canal-mayor: las W muestras del canal 0, luego las del canal 1, ..."""
        return np.ascontiguousarray(self.x).reshape(-1)


@dataclass(frozen=True)
class IntentDistribution:
    p_relax: float
    p_open: float
    p_close: float

    def __post_init__(self):
        probs = self.as_array()
        if np.any(probs < 0) or np.any(probs > 1) or abs(probs.sum() - 1.0) > 1e-9:
            raise PreconditionError('Las probabilidades de intención deben sumar 1.', code='distribution')

    def as_array(self):
        return np.array([self.p_relax, self.p_open, self.p_close])

    def most_likely(self):
        return Intent(int(np.argmax(self.as_array())))


@dataclass(frozen=True, eq=False)
class WindowBatch:
    """Conjunto de ventanas guardadas como vistas sobre una o más señales preprocesadas.

    Se comporta como una secuencia de WindowedSample; ``inputs()`` materializa la
    matriz [N, 8·W] en orden canal-mayor que consume la red.
    """

    signals: tuple  # cada una [8, n_samples]
    signal_index: np.ndarray
    t_end: np.ndarray
    labels: np.ndarray
    window_length: int
    sources: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'signal_index', np.asarray(self.signal_index, dtype=np.int64))
        object.__setattr__(self, 't_end', np.asarray(self.t_end, dtype=np.int64))
        object.__setattr__(self, 'labels', np.asarray(self.labels, dtype=np.int64))
        if not (self.signal_index.shape == self.t_end.shape == self.labels.shape):
            raise PreconditionError('Índices de ventana con longitudes distintas.', code='shape')

    @classmethod
    def from_signal(cls, signal, t_end, labels, window_length, source=None):
        t_end = np.asarray(t_end, dtype=np.int64)
        return cls(
            signals=(signal,),
            signal_index=np.zeros(t_end.shape, dtype=np.int64),
            t_end=t_end,
            labels=labels,
            window_length=window_length,
            sources=(source,) if source is not None else (),
        )

    @classmethod
    def concatenate(cls, batches):
        """Une lotes de distintas señales sin copiar los datos."""
        batches = list(batches)
        if not batches:
            raise PreconditionError('No hay lotes para concatenar.', code='empty')
        lengths = {b.window_length for b in batches}
        if len(lengths) != 1:
            raise PreconditionError('Los lotes tienen longitudes de ventana distintas.', code='shape')
        signals, sources, indices = [], [], []
        for batch in batches:
            indices.append(batch.signal_index + len(signals))
            signals.extend(batch.signals)
            sources.extend(batch.sources)
        return cls(
            signals=tuple(signals),
            signal_index=np.concatenate(indices),
            t_end=np.concatenate([b.t_end for b in batches]),
            labels=np.concatenate([b.labels for b in batches]),
            window_length=lengths.pop(),
            sources=tuple(sources),
        )

    def __len__(self):
        return int(self.t_end.shape[0])

    def __getitem__(self, item):
        if isinstance(item, (int, np.integer)):
            t = int(self.t_end[item])
            signal = self.signals[int(self.signal_index[item])]
            return WindowedSample(
                x=signal[:, t - self.window_length + 1:t + 1],
                label=Intent(int(self.labels[item])),
                t_end=t,
            )
        return self.take(np.arange(len(self))[item])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return WindowBatch(
            signals=self.signals,
            signal_index=self.signal_index[indices],
            t_end=self.t_end[indices],
            labels=self.labels[indices],
            window_length=self.window_length,
            sources=self.sources,
        )

    @property
    def n_channels(self):
        return self.signals[0].shape[0] if self.signals else N_CHANNELS

    def inputs(self):
        """Matriz [N, canales·W] en orden canal-mayor (copia)."""
        n_features = self.n_channels * self.window_length
        out = np.empty((len(self), n_features), dtype=np.float64)
        for k, signal in enumerate(self.signals):
            mask = self.signal_index == k
            if not mask.any():
                continue
            views = sliding_window_view(signal, self.window_length, axis=1)
            starts = self.t_end[mask] - self.window_length + 1
            out[mask] = views[:, starts, :].transpose(1, 0, 2).reshape(-1, n_features)
        return out
