from django.apps import AppConfig


class MetaAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'meta'
    verbose_name = 'Meta-aprendizaje'
