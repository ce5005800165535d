from django.apps import AppConfig


class FunctionalCalculusConfig(AppConfig):
    name = "functional_calculus"
    verbose_name = "Functional Calculus"
