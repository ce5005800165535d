from django.apps import AppConfig


class QmatrixConfig(AppConfig):
    name = "qmatrix"
    verbose_name = "Quaternionic Matrices"
