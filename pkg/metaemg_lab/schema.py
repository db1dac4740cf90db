import graphene

# Importar los schemas de cada módulo
import harness.schema


class Query(
    harness.schema.Query,
    graphene.ObjectType,
):
    pass


schema = graphene.Schema(query=Query)
