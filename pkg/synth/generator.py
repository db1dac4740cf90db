"""Generador de grabaciones y corpus sintético de EMG con deriva entre sesiones."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError

from dataio.recordings import write_recording
from dataio.types import N_CHANNELS, Condition, Intent, RawRecording

from .profiles import (
    PROFILE_STREAM,
    SHIFT_STREAM,
    CorpusConfig,
    SessionShift,
    SubjectProfile,
    derive_seed,
    sample_profile,
    sample_shift,
    stream,
)

logger = logging.getLogger(__name__)

# relax, luego (abrir, relax, cerrar, relax) tres veces
CUE_SCRIPT = (Intent.RELAX,) + (Intent.OPEN, Intent.RELAX, Intent.CLOSE, Intent.RELAX) * 3
CONDITIONS = (
    Condition.ARM_ON_MOTOR_OFF,
    Condition.ARM_ON_MOTOR_ON,
    Condition.ARM_OFF_MOTOR_OFF,
    Condition.ARM_OFF_MOTOR_ON,
)
MANIFEST_NAME = 'manifest.json'


def cue_script(config=CorpusConfig()):
    """Señal verbal por muestra del guion completo."""
    per_cue = int(round(config.cue_seconds * config.sample_rate_hz))
    return np.repeat(np.array([int(c) for c in CUE_SCRIPT], dtype=np.int8), per_cue)


def generate_recording(profile: SubjectProfile, shift: SessionShift, condition, seed: int,
                       config: CorpusConfig = CorpusConfig(), **metadata) -> RawRecording:
    """Una grabación a partir del modelo del sujeto, la deriva y la condición.

    La activación sigue a la señal verbal con un retraso de reacción; se suma
    ruido gaussiano por canal y espasmos con llegadas de Poisson, y se recorta a
    [0, 1000]. Determinista dada la semilla.
    """
    condition = Condition(condition)
    rng = stream(seed)
    cues = cue_script(config)
    n = cues.size

    lag = int(round(config.latency_ms * config.sample_rate_hz / 1000.0))
    intent = np.concatenate([np.full(min(lag, n), int(Intent.RELAX), dtype=np.int8), cues[:n - lag]]) if lag else cues

    activation = profile.mean_activation[intent.astype(np.int64)].copy()
    if condition.motor_on:
        opening = intent == Intent.OPEN
        flexors = list(config.flexor_channels)
        activation[np.ix_(opening, flexors)] *= config.motor_on_open_scale
    tonic = profile.tonic_level + (config.arm_off_tone if condition.arm_off_table else 0.0)

    signal = shift.apply(activation + tonic)
    signal = signal + rng.standard_normal(size=(n, N_CHANNELS)) * profile.noise_std
    signal = signal + _spasticity_bursts(rng, profile, n, config)

    return RawRecording(
        subject_id=profile.subject_id,
        day=metadata.get('day', 1),
        condition=condition,
        sample_rate_hz=config.sample_rate_hz,
        channels=np.clip(signal, 0.0, 1000.0),
        cues=cues,
        recording_id=metadata.get('recording_id', ''),
        repetition=metadata.get('repetition', 0),
    )


def _spasticity_bursts(rng, profile, n, config):
    bursts = np.zeros((n, N_CHANNELS))
    duration = n / config.sample_rate_hz
    count = rng.poisson(profile.spasticity_burst_rate * duration)
    length = max(1, int(round(config.burst_seconds * config.sample_rate_hz)))
    for _ in range(count):
        start = int(rng.integers(0, n))
        amplitude = rng.uniform(*config.burst_amplitude_range)
        involved = rng.random(N_CHANNELS) < 0.5
        bursts[start:start + length, involved] += amplitude
    return bursts


@dataclass(frozen=True, eq=False)
class RecordingPlan:
    """Todo lo necesario para generar (y volver a generar) una grabación."""

    subject_id: str
    day: int
    condition: Condition
    repetition: int
    seed: int
    profile: SubjectProfile
    shift: SessionShift

    @property
    def recording_id(self):
        return f"{self.subject_id}_d{self.day}_{self.condition.value}_r{self.repetition}"

    def generate(self, config):
        return generate_recording(
            self.profile, self.shift, self.condition, self.seed, config,
            day=self.day, recording_id=self.recording_id, repetition=self.repetition,
        )


def plan_corpus(n_subjects: int, seed: int, config: CorpusConfig = CorpusConfig()):
    """Plan del corpus: 8 grabaciones del día 1 (4 condiciones × 2) y 6 del día 2.

    El día 1 usa la colocación de referencia; el día 2 una deriva nueva por sujeto.
    """
    if n_subjects < 1:
        raise ValidationError('Se necesita al menos un sujeto.', code='subjects')

    plans = []
    for s in range(n_subjects):
        subject_id = f"S{s + 1}"
        profile = sample_profile(subject_id, stream(seed, s, PROFILE_STREAM), config)
        day2_shift = sample_shift(stream(seed, s, SHIFT_STREAM), config)

        day1 = [(cond, rep) for rep in range(config.day1_repetitions) for cond in CONDITIONS]
        day2 = [(CONDITIONS[i % len(CONDITIONS)], i // len(CONDITIONS)) for i in range(config.day2_recordings)]
        for day, entries, shift in ((1, day1, SessionShift.identity()), (2, day2, day2_shift)):
            for cond, rep in entries:
                index = len(plans)
                plans.append(RecordingPlan(
                    subject_id=subject_id,
                    day=day,
                    condition=cond,
                    repetition=rep,
                    seed=derive_seed(seed, s, index),
                    profile=profile,
                    shift=shift,
                ))
    return plans


def generate_corpus(n_subjects: int, seed: int, config: CorpusConfig = CorpusConfig(), workers: int = 1):
    """Genera todas las grabaciones; el resultado no depende del número de hilos."""
    return _generate(plan_corpus(n_subjects, seed, config), config, workers)


def _generate(plans, config, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda plan: plan.generate(config), plans))
    return [plan.generate(config) for plan in plans]


def write_corpus(out_dir, n_subjects: int, seed: int, config: CorpusConfig = CorpusConfig(), workers: int = 1):
    """Escribe las grabaciones CSV y el manifiesto JSON; devuelve el manifiesto."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plans = plan_corpus(n_subjects, seed, config)
    recordings = _generate(plans, config, workers)

    entries = []
    for plan, rec in zip(plans, recordings):
        path = write_recording(rec, out_dir / f"{plan.recording_id}.csv")
        entries.append({
            'recording_id': plan.recording_id,
            'subject_id': plan.subject_id,
            'day': plan.day,
            'condition': plan.condition.value,
            'repetition': plan.repetition,
            'seed': plan.seed,
            'path': path.name,
            'shift': plan.shift.to_dict(),
        })

    manifest = {
        'seed': seed,
        'n_subjects': n_subjects,
        'config': config.to_dict(),
        'subjects': [plan.profile.to_dict() for plan in plans if plan.day == 1 and plan.repetition == 0
                     and plan.condition == CONDITIONS[0]],
        'recordings': entries,
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + '\n', encoding='utf-8')

    _log_summary(recordings)
    logger.info('Corpus escrito en %s: %d grabaciones de %d sujetos', out_dir, len(entries), n_subjects)
    return manifest


def _log_summary(recordings):
    by_subject = {}
    for rec in recordings:
        by_subject.setdefault(rec.subject_id, []).append(rec)
    for subject_id, recs in by_subject.items():
        channels = np.vstack([r.channels for r in recs])
        cues = np.concatenate([r.cues for r in recs])
        for intent in Intent:
            means = channels[cues == intent].mean(axis=0)
            logger.info('%s %s: %s', subject_id, intent.label, np.array2string(means, precision=0))
