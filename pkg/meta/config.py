from dataclasses import asdict, dataclass

from django.db import models

from .exceptions import MetaConfigurationError


class InnerRule(models.TextChoices):
    SGD = 'sgd', 'Descenso de gradiente'
    ADAM = 'adam', 'Adam'


class MetaGradientKind(models.TextChoices):
    SECOND_ORDER = 'second_order', 'Segundo orden'
    FIRST_ORDER = 'first_order', 'Primer orden'


class OuterRule(models.TextChoices):
    ADAM = 'adam', 'Adam'
    SGD = 'sgd', 'Descenso de gradiente'


class Reduction(models.TextChoices):
    SUM = 'sum', 'Suma sobre tareas'
    MEAN = 'mean', 'Promedio sobre tareas'


@dataclass(frozen=True)
class MetaConfig:
    """Hiperparámetros del bucle interno (α, M) y externo (β, K, programación de β)."""

    alpha: float = 1e-4
    beta: float = 5e-4
    inner_steps: int = 5
    outer_epochs: int = 50
    decay: float = 0.9
    decay_every: int = 10
    inner_rule: str = InnerRule.SGD
    meta_gradient: str = MetaGradientKind.SECOND_ORDER
    outer_rule: str = OuterRule.ADAM
    reduction: str = Reduction.SUM
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name, choices in (('inner_rule', InnerRule), ('meta_gradient', MetaGradientKind),
                              ('outer_rule', OuterRule), ('reduction', Reduction)):
            value = getattr(self, name)
            if value not in choices.values:
                raise MetaConfigurationError(f"Valor inválido para {name}: {value!r}.", code=name)
            object.__setattr__(self, name, choices(value))
        if self.alpha < 0 or self.beta <= 0:
            raise MetaConfigurationError('α debe ser ≥ 0 y β > 0.', code='learning_rate')
        if self.inner_steps < 0 or self.outer_epochs < 1:
            raise MetaConfigurationError('Se requiere M ≥ 0 y K ≥ 1.', code='steps')
        if not 0 < self.decay <= 1 or self.decay_every < 1:
            raise MetaConfigurationError('Programación de β inválida.', code='schedule')
        if self.workers < 1:
            raise MetaConfigurationError('Se requiere al menos un worker.', code='workers')
        self.check_differentiable()

    def check_differentiable(self):
        if self.meta_gradient == MetaGradientKind.SECOND_ORDER and self.inner_rule != InnerRule.SGD:
            raise MetaConfigurationError(
                'El meta-gradiente de segundo orden requiere la regla interna SGD.', code='inner_rule',
            )

    def beta_at(self, epoch):
        """β multiplicado por ``decay`` cada ``decay_every`` épocas (desde la época 0)."""
        return self.beta * self.decay ** (epoch // self.decay_every)

    def to_dict(self):
        return {key: (str(value) if isinstance(value, models.TextChoices) else value)
                for key, value in asdict(self).items()}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)
