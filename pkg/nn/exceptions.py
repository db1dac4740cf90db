from django.core.exceptions import ValidationError


class ShapeError(ValidationError):
    """Entrada o vector de parámetros que no coincide con la arquitectura."""


class OracleError(ValidationError):
    """Un oráculo de diferencias finitas superó su umbral de error relativo."""


class CheckpointError(ValidationError):
    """Archivo de parámetros ausente o con formato incompatible."""
