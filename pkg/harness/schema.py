import graphene
from graphene_django import DjangoObjectType
from graphql import GraphQLError

from .filters import ResultCellFilter
from .models import ExperimentRun, ResultCell, TaskResult


# =====================================================
#  TIPOS (GraphQL Types)
# =====================================================
class ResultCellType(DjangoObjectType):
    class Meta:
        model = ResultCell
        fields = "__all__"


class TaskResultType(DjangoObjectType):
    class Meta:
        model = TaskResult
        fields = "__all__"


class ExperimentRunType(DjangoObjectType):
    """Corrida con sus celdas y resultados por tarea"""
    config = graphene.JSONString()
    seeds = graphene.List(graphene.Int)

    class Meta:
        model = ExperimentRun
        fields = "__all__"


# =====================================================
#  QUERIES (Consultas de lectura)
# =====================================================
class Query(graphene.ObjectType):
    experiment_runs = graphene.List(ExperimentRunType, kind=graphene.String(), scenario=graphene.String())
    experiment_run_por_id = graphene.Field(ExperimentRunType, id=graphene.Int(required=True))
    result_cells = graphene.List(
        ResultCellType,
        run_id=graphene.Int(),
        kind=graphene.String(),
        scenario=graphene.String(),
        method=graphene.String(),
        subject_id=graphene.String(),
        fraction=graphene.Float(),
        n_pretrain=graphene.Int(),
        epochs=graphene.Int(),
        min_accuracy=graphene.Float(),
    )

    def resolve_experiment_runs(root, info, kind=None, scenario=None):
        """Devuelve las corridas, opcionalmente filtradas por tipo y escenario"""
        runs = ExperimentRun.objects.all()
        if kind:
            runs = runs.filter(kind=kind)
        if scenario:
            runs = runs.filter(scenario=scenario)
        return runs

    def resolve_experiment_run_por_id(root, info, id):
        try:
            return ExperimentRun.objects.get(pk=id)
        except ExperimentRun.DoesNotExist:
            raise GraphQLError("Corrida no encontrada.")

    def resolve_result_cells(root, info, **filters):
        filterset = ResultCellFilter(data=filters, queryset=ResultCell.objects.select_related('run'))
        if not filterset.is_valid():
            raise GraphQLError(f"Filtros inválidos: {dict(filterset.errors)}")
        return filterset.qs
