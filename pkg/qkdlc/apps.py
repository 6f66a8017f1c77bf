from django.apps import AppConfig


class QkdlcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'qkdlc'
    verbose_name = 'Loss-controlled QKD toolkit'
