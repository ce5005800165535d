from django.apps import AppConfig


class SSpectrumConfig(AppConfig):
    name = "s_spectrum"
    verbose_name = "S-Spectrum"
