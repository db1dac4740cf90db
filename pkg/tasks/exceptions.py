from django.core.exceptions import ValidationError


class TaskStructureError(ValidationError):
    """Grabación que no se puede dividir en soporte y consulta."""


class ScenarioError(ValidationError):
    """Argumentos inválidos para armar un escenario o submuestrear una tarea."""
