import django_filters

from .models import ResultCell


class ResultCellFilter(django_filters.FilterSet):
    """Filtros de lectura para las celdas de resultados."""

    run_id = django_filters.NumberFilter(field_name='run_id')
    kind = django_filters.CharFilter(field_name='run__kind')
    scenario = django_filters.CharFilter(field_name='run__scenario')
    min_accuracy = django_filters.NumberFilter(field_name='accuracy', lookup_expr='gte')

    class Meta:
        model = ResultCell
        fields = ['method', 'subject_id', 'fraction', 'n_pretrain', 'epochs']
