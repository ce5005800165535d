from django.apps import AppConfig


class QuaternionCoreConfig(AppConfig):
    name = "quaternion_core"
    verbose_name = "Quaternion Core"
