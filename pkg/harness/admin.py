from django.contrib import admin
from .models import ExperimentRun, ResultCell, TaskResult


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'kind', 'scenario', 'held_out', 'config_hash', 'fecha_registro')
    list_filter = ('kind', 'scenario')
    search_fields = ('config_hash', 'corpus_hash', 'held_out')
    date_hierarchy = 'fecha_registro'


@admin.register(TaskResult)
class TaskResultAdmin(admin.ModelAdmin):
    list_display = ('run', 'method', 'seed', 'task_id', 'subject_id', 'condition', 'accuracy')
    list_filter = ('method', 'subject_id', 'condition', 'day')
    search_fields = ('task_id', 'subject_id')


@admin.register(ResultCell)
class ResultCellAdmin(admin.ModelAdmin):
    list_display = ('run', 'method', 'subject_id', 'fraction', 'n_pretrain', 'epochs', 'accuracy', 'std_over_seeds')
    list_filter = ('method', 'subject_id')
    ordering = ('run', 'method', 'subject_id')
