from django.core.exceptions import ValidationError


class ExperimentError(ValidationError):
    """Argumentos de experimento inválidos (semillas, división, particiones)."""
