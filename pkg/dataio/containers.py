"""Contenedor binario versionado: firma, cabecera JSON y arreglos en formato ``.npy``.

Cada arreglo se escribe con ``np.lib.format``, que no guarda marcas de tiempo,
así que dos escrituras del mismo contenido son idénticas byte a byte (a
diferencia de ``np.savez``, que empaqueta en zip).
"""
import json
from pathlib import Path

import numpy as np

from .exceptions import PreconditionError

MAGIC = b'METAEMG-ARRAYS'
VERSION = 2


def write_arrays(path, meta, arrays):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps({'meta': meta, 'arrays': list(arrays)}, sort_keys=True).encode('utf-8')
    with path.open('wb') as fh:
        fh.write(MAGIC + b' ' + str(VERSION).encode('ascii') + b'\n')
        fh.write(header + b'\n')
        for array in arrays.values():
            np.lib.format.write_array(fh, np.ascontiguousarray(array), allow_pickle=False)
    return path


def read_arrays(path):
    """Devuelve ``(meta, arrays)``; valida la firma y la versión del archivo."""
    path = Path(path)
    with path.open('rb') as fh:
        signature = fh.readline().rstrip(b'\n').split(b' ')
        if len(signature) != 2 or signature[0] != MAGIC:
            raise PreconditionError(f"{path} no es un contenedor de arreglos válido.", code='format')
        if signature[1] != str(VERSION).encode('ascii'):
            raise PreconditionError(
                f"{path}: versión {signature[1].decode(errors='replace')} no soportada.", code='version',
            )
        header = json.loads(fh.readline().decode('utf-8'))
        try:
            arrays = {name: np.lib.format.read_array(fh, allow_pickle=False) for name in header['arrays']}
        except ValueError as exc:
            raise PreconditionError(f"{path}: arreglo dañado ({exc}).", code='format')
    return header['meta'], arrays
