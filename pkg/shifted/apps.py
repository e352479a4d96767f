from django.apps import AppConfig


class ShiftedConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'shifted'
