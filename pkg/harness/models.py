from django.db import models
from django.core.exceptions import ValidationError

from tasks.splits import Scenario

from .methods import Method


class ExperimentRun(models.Model):
    """Una corrida de ``eval`` o ``ablate`` registrada con ``--record``."""

    class Kind(models.TextChoices):
        EVAL = 'eval', 'Evaluación'
        FRACTION = 'fraction', 'Ablación de soporte'
        SUBJECTS = 'subjects', 'Ablación de sujetos'
        EPOCHS = 'epochs', 'Ablación de épocas'

    kind = models.CharField(
        max_length=20,
        choices=Kind.choices,
        verbose_name='Tipo de corrida'
    )
    scenario = models.CharField(
        max_length=20,
        choices=Scenario.choices,
        verbose_name='Escenario'
    )
    held_out = models.CharField(
        max_length=20,
        blank=True,
        verbose_name='Sujeto excluido',
        help_text='Solo para adaptación de sujeto.'
    )
    config = models.JSONField(verbose_name='Configuración')
    config_hash = models.CharField(max_length=64, verbose_name='Hash de configuración')
    corpus_hash = models.CharField(max_length=64, blank=True, verbose_name='Hash del corpus')
    seeds = models.JSONField(default=list, verbose_name='Semillas')
    results_dir = models.CharField(max_length=500, verbose_name='Carpeta de resultados')

    # Campos de auditoría
    fecha_registro = models.DateTimeField(
        'Fecha de registro',
        auto_now_add=True
    )

    class Meta:
        verbose_name = 'Corrida de experimento'
        verbose_name_plural = 'Corridas de experimentos'
        ordering = ['-fecha_registro']

    def __str__(self):
        return f"{self.get_kind_display()} - {self.get_scenario_display()} ({self.config_hash[:8]})"

    def clean(self):
        super().clean()
        if self.scenario == Scenario.SUBJECT and self.kind != self.Kind.SUBJECTS and not self.held_out:
            raise ValidationError({'held_out': 'La adaptación de sujeto requiere un sujeto excluido.'})
        if not self.seeds:
            raise ValidationError({'seeds': 'Se requiere al menos una semilla.'})


class TaskResult(models.Model):
    """Precisión de un método en la consulta de una tarea, para una semilla."""

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='task_results',
        verbose_name='Corrida'
    )
    method = models.CharField(max_length=30, choices=Method.choices, verbose_name='Método')
    seed = models.BigIntegerField(verbose_name='Semilla')
    task_id = models.CharField(max_length=100, verbose_name='Tarea')
    subject_id = models.CharField(max_length=20, verbose_name='Sujeto')
    day = models.PositiveSmallIntegerField(verbose_name='Día')
    condition = models.CharField(max_length=10, verbose_name='Condición')
    fraction = models.FloatField(null=True, blank=True, verbose_name='Fracción de soporte')
    n_pretrain = models.PositiveSmallIntegerField(null=True, blank=True, verbose_name='Sujetos de preentrenamiento')
    epochs = models.PositiveSmallIntegerField(null=True, blank=True, verbose_name='Épocas de ajuste')
    correct = models.PositiveIntegerField(verbose_name='Ventanas correctas')
    total = models.PositiveIntegerField(verbose_name='Ventanas de consulta')
    accuracy = models.FloatField(verbose_name='Precisión (%)')

    class Meta:
        verbose_name = 'Resultado por tarea'
        verbose_name_plural = 'Resultados por tarea'
        ordering = ['run', 'method', 'seed', 'task_id']

    def __str__(self):
        return f"{self.method} {self.task_id} semilla {self.seed}: {self.accuracy:.2f}%"

    def clean(self):
        super().clean()
        if self.total == 0 or self.correct > self.total:
            raise ValidationError({'correct': 'Las ventanas correctas no pueden superar al total.'})


class ResultCell(models.Model):
    """Una celda de la tabla de resultados: (método, etiquetas, sujeto)."""

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='cells',
        verbose_name='Corrida'
    )
    method = models.CharField(max_length=30, choices=Method.choices, verbose_name='Método')
    subject_id = models.CharField(max_length=20, verbose_name='Sujeto')
    fraction = models.FloatField(null=True, blank=True, verbose_name='Fracción de soporte')
    n_pretrain = models.PositiveSmallIntegerField(null=True, blank=True, verbose_name='Sujetos de preentrenamiento')
    epochs = models.PositiveSmallIntegerField(null=True, blank=True, verbose_name='Épocas de ajuste')
    accuracy = models.FloatField(verbose_name='Precisión media (%)')
    std_over_seeds = models.FloatField(verbose_name='Desviación sobre semillas')
    n_tasks = models.PositiveIntegerField(verbose_name='Tareas')

    class Meta:
        verbose_name = 'Celda de resultados'
        verbose_name_plural = 'Celdas de resultados'
        ordering = ['run', 'method', 'subject_id']

    def __str__(self):
        return f"{self.method} {self.subject_id}: {self.accuracy:.2f} ± {self.std_over_seeds:.2f}"
