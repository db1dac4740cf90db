from django.core.exceptions import ValidationError


class MetaConfigurationError(ValidationError):
    """Hiperparámetros de meta-entrenamiento inválidos o combinación no soportada."""
