from django.apps import AppConfig


class AutoflowConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'autoflow'
    verbose_name = 'Autoflow Workflow Optimisation'

    def ready(self):
        """
        Import signal handlers here.
        """
        import autoflow.handlers  # noqa: F401
