"""Manifiesto de cada corrida: configuración, semillas, hashes de entrada y versiones."""
import hashlib
import json
import platform
from importlib import metadata
from pathlib import Path

MANIFEST_NAME = 'manifest.json'
ARTIFACT_VERSION = 1
PACKAGES = ('numpy', 'pandas', 'Django')
SEED_STREAMS = {
    'synth': 'Philox(SeedSequence([corpus_seed, subject, recording]))',
    'init': 'default_rng(training_seed)',
    'shuffle': 'default_rng(derive_seed(training_seed, task_index))',
}


def file_sha256(path):
    digest = hashlib.sha256()
    with Path(path).open('rb') as fh:
        for block in iter(lambda: fh.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def directory_hash(directory, patterns=('*.csv', '*.task')):
    """Hash de los nombres y contenidos de los archivos de entrada, en orden de nombre."""
    directory = Path(directory)
    digest = hashlib.sha256()
    paths = sorted({p for pattern in patterns for p in directory.glob(pattern)})
    for path in paths:
        digest.update(path.name.encode('utf-8'))
        digest.update(file_sha256(path).encode('ascii'))
    return digest.hexdigest()


def versions():
    found = {'python': platform.python_version(), 'artifacts': ARTIFACT_VERSION}
    for package in PACKAGES:
        try:
            found[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            found[package] = None
    return found


def run_manifest(kind, config, seeds=(), corpus=None, config_file=None, **extra):
    """``config_file`` es el JSON pasado con ``--config``; se guarda su ruta y su hash."""
    return {
        'kind': kind,
        'config': config.to_dict(),
        'config_hash': config.config_hash(),
        'config_file': str(config_file) if config_file else None,
        'config_file_hash': file_sha256(config_file) if config_file else None,
        'seeds': [int(s) for s in seeds],
        'seed_streams': SEED_STREAMS,
        'corpus': str(corpus) if corpus is not None else None,
        'corpus_hash': directory_hash(corpus) if corpus is not None else None,
        'versions': versions(),
        **extra,
    }


def write_manifest(directory, manifest):
    path = Path(directory) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + '\n', encoding='utf-8')
    return path
