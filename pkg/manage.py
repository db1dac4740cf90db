#!/usr/bin/env python
"""Utilidad de línea de comandos de MetaEMG (synth, preprocess, train, eval, ablate, gradcheck)."""
import os
import sys


def main(argv=None):
    """Ejecuta un subcomando y devuelve el código de salida."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'metaemg_lab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    try:
        execute_from_command_line(argv if argv is not None else sys.argv)
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
