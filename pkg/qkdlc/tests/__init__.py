"""
Test package for qkdlc
"""
import os

import django
from django.conf import settings

# Setup Django when the suite runs outside manage.py
if not settings.configured:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'qkdlc_project.settings')
    django.setup()
