from django.apps import AppConfig


class BoundedTransformConfig(AppConfig):
    name = "bounded_transform"
    verbose_name = "Bounded Transform"
