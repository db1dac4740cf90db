"""Configuración completa de un experimento y lectura de ``--config FILE.json``."""
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from dataio.types import N_CHANNELS, WindowConfig
from meta.config import InnerRule, MetaConfig
from nn.params import NetworkConfig
from synth.profiles import CorpusConfig

from .exceptions import ExperimentError

SECTIONS = {
    'window': WindowConfig,
    'corpus': CorpusConfig,
    'network': NetworkConfig,
    'meta': MetaConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    window: WindowConfig = field(default_factory=WindowConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    meta: MetaConfig = field(default_factory=MetaConfig)

    # Ajuste fino sobre el soporte de cada tarea de prueba
    fine_tune_lr: float = 5e-4
    fine_tune_batch: int = 64
    fine_tune_rule: str = InnerRule.ADAM
    short_epochs: int = 3
    converged_epochs: int = 50

    # Preentrenamiento convencional
    pretrain_epochs: int = 50
    pretrain_lr: float = 5e-4
    pretrain_batch: int = 64

    seeds: tuple = (0, 1, 2)
    fractions: tuple = (0.25, 0.5, 0.75, 1.0)
    fraction_mode: str = 'prefix'
    n_pretrain: tuple = (1, 2, 3, 4)
    finetune_epochs: tuple = (1, 3, 5, 10, 25, 50)

    def __post_init__(self):
        for name in ('seeds', 'fractions', 'n_pretrain', 'finetune_epochs'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if min(self.short_epochs, self.converged_epochs, self.pretrain_epochs) < 1:
            raise ExperimentError('Las épocas de entrenamiento deben ser ≥ 1.', code='epochs')
        if self.fine_tune_rule not in InnerRule.values:
            raise ExperimentError(f"Regla de ajuste fino desconocida: {self.fine_tune_rule!r}.", code='rule')
        object.__setattr__(self, 'fine_tune_rule', InnerRule(self.fine_tune_rule))
        if self.fine_tune_batch is not None and self.fine_tune_batch < 1:
            raise ExperimentError('El tamaño de mini-lote debe ser ≥ 1.', code='batch')
        if any(not 0 < f <= 1 for f in self.fractions):
            raise ExperimentError('Las fracciones de soporte deben estar en (0, 1].', code='fraction')

    def network_for(self, window_length, n_channels=N_CHANNELS):
        """La red configurada con la entrada ajustada a la longitud de ventana."""
        hidden = self.network.layer_sizes[1:]
        return dataclasses.replace(self.network, layer_sizes=(n_channels * window_length,) + hidden)

    def to_dict(self):
        data = {}
        for item in dataclasses.fields(self):
            value = getattr(self, item.name)
            data[item.name] = value.to_dict() if item.name in SECTIONS else value
        return json.loads(json.dumps(data))

    @classmethod
    def from_dict(cls, data):
        """Combina ``data`` con los valores por defecto; las secciones pueden ser parciales."""
        default = cls()
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ExperimentError(f"Claves de configuración desconocidas: {sorted(unknown)}.", code='config')
        kwargs = {}
        for key, value in data.items():
            if key in SECTIONS:
                merged = {**getattr(default, key).to_dict(), **value}
                kwargs[key] = SECTIONS[key].from_dict(merged)
            else:
                kwargs[key] = value
        return cls(**kwargs)

    def config_hash(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def with_seeds(self, seeds):
        return dataclasses.replace(self, seeds=tuple(seeds))


def read_config_file(path=None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ExperimentError(f"No existe el archivo de configuración {path}.", code='missing')
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ExperimentError(f"{path}: JSON inválido ({exc.msg}, línea {exc.lineno}).", code='json')
    if not isinstance(data, dict):
        raise ExperimentError(f"{path} debe contener un objeto JSON.", code='json')
    return ExperimentConfig.from_dict(data)
