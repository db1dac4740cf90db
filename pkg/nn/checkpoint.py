"""Lectura y escritura de θ con su configuración y el orden de aplanado."""
import logging
from pathlib import Path

from dataio.containers import read_arrays, write_arrays

from .exceptions import CheckpointError
from .params import FLATTEN_ORDER, ModelParams, NetworkConfig

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'checkpoint'


def save_checkpoint(params: ModelParams, path, extra=None):
    meta = {
        'kind': CHECKPOINT_KIND,
        'order': FLATTEN_ORDER,
        'network': params.config.to_dict(),
        'extra': extra or {},
    }
    path = write_arrays(path, meta, {'theta': params.vector})
    logger.info('Parámetros guardados en %s (%d valores)', path, params.config.n_params)
    return path


def load_checkpoint(path):
    """Devuelve ``(params, extra)``."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"No existe el archivo de parámetros {path}.", code='missing', params={'path': str(path)})
    meta, arrays = read_arrays(path)
    if meta.get('kind') != CHECKPOINT_KIND or 'theta' not in arrays:
        raise CheckpointError(f"{path} no contiene parámetros de la red.", code='format', params={'path': str(path)})
    if meta.get('order') != FLATTEN_ORDER:
        raise CheckpointError(f"{path}: orden de aplanado {meta.get('order')!r} incompatible.", code='order')
    config = NetworkConfig.from_dict(meta['network'])
    return ModelParams(config, arrays['theta']), meta.get('extra', {})
