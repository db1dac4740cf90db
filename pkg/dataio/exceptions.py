from django.core.exceptions import ValidationError


class RecordingParseError(ValidationError):
    """Archivo de grabación que no cumple el esquema CSV.

    ``params['line']`` guarda el número de línea (base 1) del problema.
    """

    def __init__(self, message, code, line):
        super().__init__(message, code=code, params={'line': line})
        self.line = line


class PreconditionError(ValidationError):
    """Entrada que no cumple la precondición de una etapa del preprocesamiento."""


class WindowingError(ValidationError):
    """Configuración de ventanas inválida o grabación demasiado corta."""
