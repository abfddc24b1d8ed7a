import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "soficlab.settings")
django.setup()
