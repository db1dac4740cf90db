"""Firmas de sujeto, deriva entre sesiones y parámetros del corpus sintético."""
from dataclasses import asdict, dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from dataio.types import N_CHANNELS, Intent

# Flujos de aleatoriedad dentro de la clave (semilla, sujeto, flujo)
PROFILE_STREAM = 0
SHIFT_STREAM = 1


@dataclass(frozen=True)
class CorpusConfig:
    """Priors del generador. Las magnitudes son valores por defecto documentados,
    no medidas clínicas."""

    sample_rate_hz: int = 100
    cue_seconds: float = 5.0
    latency_ms: float = 300.0

    # Firma del sujeto (cuentas crudas)
    relax_range: tuple = (40.0, 120.0)
    active_boost_range: tuple = (150.0, 450.0)
    crosstalk_range: tuple = (0.0, 80.0)
    tonic_range: tuple = (20.0, 120.0)
    noise_range: tuple = (15.0, 40.0)
    burst_rate_range: tuple = (0.0, 0.1)
    burst_seconds: float = 0.4
    burst_amplitude_range: tuple = (150.0, 400.0)
    max_subject_roll: int = 2
    extensor_channels: tuple = (0, 1, 2, 3)
    flexor_channels: tuple = (4, 5, 6, 7)

    # Condiciones de la órtesis
    motor_on_open_scale: float = 0.6
    arm_off_tone: float = 40.0

    # Deriva del día 2
    rotation_std: float = 0.3
    gain_std: float = 0.1
    tone_drift_std: float = 25.0

    day1_repetitions: int = 2
    day2_recordings: int = 6

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = {key: tuple(value) if isinstance(value, list) else value for key, value in data.items()}
        return cls(**data)


@dataclass(frozen=True, eq=False)
class SubjectProfile:
    subject_id: str
    mean_activation: np.ndarray  # [3 intenciones, 8 canales]
    tonic_level: np.ndarray  # [8]
    noise_std: np.ndarray  # [8]
    spasticity_burst_rate: float = 0.0

    def __post_init__(self):
        for name in ('mean_activation', 'tonic_level', 'noise_std'):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        self.clean()

    def clean(self):
        """Valida la firma: medias en [0, 1000] e intenciones separables."""
        if self.mean_activation.shape != (3, N_CHANNELS):
            raise ValidationError('mean_activation debe tener forma [3, 8].', code='shape')
        if self.tonic_level.shape != (N_CHANNELS,) or self.noise_std.shape != (N_CHANNELS,):
            raise ValidationError('tonic_level y noise_std deben tener 8 canales.', code='shape')
        if np.any(self.noise_std < 0) or self.spasticity_burst_rate < 0:
            raise ValidationError('El ruido y la tasa de espasmos no pueden ser negativos.', code='negative')
        means = self.mean_activation + self.tonic_level
        if np.any(self.mean_activation < 0) or np.any(means > 1000):
            raise ValidationError('Las medias generadas deben quedar en [0, 1000].', code='range')
        gap = np.abs(self.mean_activation[Intent.OPEN] - self.mean_activation[Intent.CLOSE])
        if not np.any(gap >= self.noise_std):
            raise ValidationError(
                f"{self.subject_id}: apertura y cierre no son separables con este ruido.",
                code='separability',
            )

    def to_dict(self):
        return {
            'subject_id': self.subject_id,
            'mean_activation': self.mean_activation.tolist(),
            'tonic_level': self.tonic_level.tolist(),
            'noise_std': self.noise_std.tolist(),
            'spasticity_burst_rate': self.spasticity_burst_rate,
        }


@dataclass(frozen=True, eq=False)
class SessionShift:
    """Cambio entre sesiones: rotación del brazalete, ganancia y tono muscular."""

    channel_permutation_angle: float = 0.0
    gain_drift: np.ndarray = field(default_factory=lambda: np.ones(N_CHANNELS))
    tone_drift: np.ndarray = field(default_factory=lambda: np.zeros(N_CHANNELS))

    def __post_init__(self):
        object.__setattr__(self, 'gain_drift', np.asarray(self.gain_drift, dtype=np.float64))
        object.__setattr__(self, 'tone_drift', np.asarray(self.tone_drift, dtype=np.float64))
        if np.any(self.gain_drift <= 0):
            raise ValidationError('Los factores de ganancia deben ser positivos.', code='gain')

    @classmethod
    def identity(cls):
        return cls()

    def apply(self, values):
        """Aplica la deriva a una matriz [n, 8].

        La rotación es un desplazamiento cíclico fraccionario: cada canal mezcla
        los dos electrodos vecinos según la parte fraccionaria del ángulo.
        """
        whole = int(np.floor(self.channel_permutation_angle))
        frac = self.channel_permutation_angle - whole
        mixed = (1.0 - frac) * np.roll(values, whole, axis=1) + frac * np.roll(values, whole + 1, axis=1)
        return mixed * self.gain_drift + self.tone_drift

    def to_dict(self):
        return {
            'channel_permutation_angle': self.channel_permutation_angle,
            'gain_drift': self.gain_drift.tolist(),
            'tone_drift': self.tone_drift.tolist(),
        }


def stream(seed, *key):
    """Generador contador (Philox) para la clave (semilla, ...)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def derive_seed(seed, *key):
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, dtype=np.uint64)[0])


def sample_profile(subject_id, rng, config=CorpusConfig()):
    """Firma aleatoria: extensores activos al abrir, flexores al cerrar."""
    extensors = list(config.extensor_channels)
    flexors = list(config.flexor_channels)

    relax = rng.uniform(*config.relax_range, size=N_CHANNELS)
    boost = rng.uniform(*config.active_boost_range, size=N_CHANNELS)
    crosstalk = rng.uniform(*config.crosstalk_range, size=N_CHANNELS)

    open_row = relax.copy()
    open_row[extensors] += boost[extensors]
    open_row[flexors] += crosstalk[flexors]
    close_row = relax.copy()
    close_row[flexors] += boost[flexors]
    close_row[extensors] += crosstalk[extensors]

    roll = int(rng.integers(0, config.max_subject_roll + 1))
    mean_activation = np.roll(np.vstack([relax, open_row, close_row]), roll, axis=1)

    return SubjectProfile(
        subject_id=subject_id,
        mean_activation=mean_activation,
        tonic_level=rng.uniform(*config.tonic_range, size=N_CHANNELS),
        noise_std=rng.uniform(*config.noise_range, size=N_CHANNELS),
        spasticity_burst_rate=float(rng.uniform(*config.burst_rate_range)),
    )


def sample_shift(rng, config=CorpusConfig()):
    return SessionShift(
        channel_permutation_angle=float(rng.normal(0.0, config.rotation_std)),
        gain_drift=np.exp(rng.normal(0.0, config.gain_std, size=N_CHANNELS)),
        tone_drift=rng.normal(0.0, config.tone_drift_std, size=N_CHANNELS),
    )
