from django.apps import AppConfig


class SpectralCoreConfig(AppConfig):
    name = "spectral_core"
    verbose_name = "Spectral Measures"
