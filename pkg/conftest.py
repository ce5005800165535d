"""Configure Django before pytest collects the SimpleTestCase suites in each app's tests.py."""
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "core.settings")
django.setup()
