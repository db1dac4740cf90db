"""Lectura y escritura de grabaciones en el esquema CSV del proyecto.

Formato (UTF-8)::

    subject,day,condition,rate_hz
    S1,1,on_off,100
    e1,e2,e3,e4,e5,e6,e7,e8,cue
    512.0,498.25,...,relax

Las dos cabeceras se leen a mano; el cuerpo se carga con pandas y se valida
por columnas. Los errores indican la línea del archivo (base 1).
"""
import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import RecordingParseError
from .types import CUE_TOKENS, N_CHANNELS, Condition, Intent, RawRecording

logger = logging.getLogger(__name__)

META_HEADER = ['subject', 'day', 'condition', 'rate_hz']
CHANNEL_COLUMNS = [f'e{i}' for i in range(1, N_CHANNELS + 1)]
BODY_HEADER = CHANNEL_COLUMNS + ['cue']
FIRST_BODY_LINE = 4
CUE_CODES = {token: int(intent) for token, intent in CUE_TOKENS.items()}

_REPETITION = re.compile(r'_r(\d+)$')
_PARSER_LINE = re.compile(r'line (\d+)')


def parse_recording(path) -> RawRecording:
    """Lee una grabación y valida el esquema; los errores nombran la línea."""
    path = Path(path)
    with path.open(newline='', encoding='utf-8') as fh:
        meta = _parse_metadata(_split(fh.readline()), _split(fh.readline()))
        _check_body_header(_split(fh.readline()))
        body = _read_body(fh)

    channels, cues = _validate_body(body)
    match = _REPETITION.search(path.stem)
    rec = RawRecording(
        subject_id=meta['subject'],
        day=meta['day'],
        condition=meta['condition'],
        sample_rate_hz=meta['rate_hz'],
        channels=channels,
        cues=cues,
        recording_id=path.stem,
        repetition=int(match.group(1)) if match else 0,
    )

    opens, closes = rec.motion_counts()
    if (opens, closes) != (3, 3):
        last_line = FIRST_BODY_LINE + len(body) - 1
        raise RecordingParseError(
            f"Línea {last_line}: se esperaban tres aperturas y tres cierres, "
            f"se encontraron {opens} y {closes}.",
            code='structure',
            line=last_line,
        )
    logger.debug('Leída %s (%d muestras)', path.name, rec.n_samples)
    return rec


def _split(line):
    line = line.rstrip('\r\n')
    return [token.strip() for token in line.split(',')] if line else None


def _parse_metadata(header, row):
    if header != META_HEADER:
        raise RecordingParseError(
            f"Línea 1: cabecera inválida {header!r}; se esperaba {','.join(META_HEADER)}.",
            code='header',
            line=1,
        )
    if row is None or len(row) != len(META_HEADER):
        raise RecordingParseError('Línea 2: fila de metadatos incompleta.', code='header', line=2)

    subject, day, condition, rate = row
    try:
        day = int(day)
        rate = int(rate)
    except ValueError:
        raise RecordingParseError('Línea 2: día y frecuencia deben ser enteros.', code='header', line=2)
    if day not in (1, 2) or rate <= 0:
        raise RecordingParseError(f"Línea 2: día {day} o frecuencia {rate} inválidos.", code='header', line=2)
    if condition not in Condition.values:
        raise RecordingParseError(f"Línea 2: condición desconocida {condition!r}.", code='header', line=2)
    if not subject:
        raise RecordingParseError('Línea 2: falta el identificador del sujeto.', code='header', line=2)
    return {'subject': subject, 'day': day, 'condition': Condition(condition), 'rate_hz': rate}


def _check_body_header(header):
    if header == BODY_HEADER:
        return
    found = [col for col in (header or []) if re.fullmatch(r'e\d+', col)]
    if len(found) != N_CHANNELS:
        raise RecordingParseError(
            f"Línea 3: se esperaban {N_CHANNELS} canales, la cabecera tiene {len(found)}.",
            code='channels',
            line=3,
        )
    raise RecordingParseError(
        f"Línea 3: cabecera inválida; se esperaba {','.join(BODY_HEADER)}.",
        code='header',
        line=3,
    )


def _read_body(fh):
    try:
        body = pd.read_csv(fh, header=None, dtype={N_CHANNELS: str}, float_precision='round_trip')
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=BODY_HEADER)
    except pd.errors.ParserError as exc:
        found = _PARSER_LINE.search(str(exc))
        line = FIRST_BODY_LINE + int(found.group(1)) - 1 if found else FIRST_BODY_LINE
        raise RecordingParseError(
            f"Línea {line}: se esperaban {N_CHANNELS} canales y la señal, la fila tiene más columnas.",
            code='channels',
            line=line,
        )

    width = body.shape[1]
    if width != N_CHANNELS + 1:
        if width > N_CHANNELS + 1:
            index = int(np.argmax(body.iloc[:, N_CHANNELS + 1:].notna().any(axis=1).to_numpy()))
        else:
            index = 0
        _raise_width(index, width)
    body.columns = BODY_HEADER
    return body


def _raise_width(index, width):
    line = FIRST_BODY_LINE + index
    raise RecordingParseError(
        f"Línea {line}: se esperaban {N_CHANNELS} canales y la señal, se encontraron {width} columnas.",
        code='channels',
        line=line,
    )


def _validate_body(body):
    """Canales [n, 8] float64 y señales [n] int8; la primera fila inválida decide el error."""
    if body.empty:
        return np.empty((0, N_CHANNELS)), np.empty(0, dtype=np.int8)

    incomplete = body['cue'].isna().to_numpy()
    if incomplete.any():
        index = int(np.argmax(incomplete))
        _raise_width(index, int(body.iloc[index].notna().sum()))

    values = body[CHANNEL_COLUMNS].apply(pd.to_numeric, errors='coerce').to_numpy(dtype=np.float64)
    bad_values = ~np.isfinite(values)
    tokens = body['cue'].str.strip()
    bad_cues = ~tokens.isin(list(CUE_CODES)).to_numpy()

    first_value = int(np.argmax(bad_values.any(axis=1))) if bad_values.any() else len(body)
    first_cue = int(np.argmax(bad_cues)) if bad_cues.any() else len(body)
    if first_value <= first_cue and first_value < len(body):
        column = int(np.argmax(bad_values[first_value]))
        token = body.iloc[first_value, column]
        line = FIRST_BODY_LINE + first_value
        raise RecordingParseError(f"Línea {line}: valor no numérico o no finito {token!r}.", code='value', line=line)
    if first_cue < len(body):
        line = FIRST_BODY_LINE + first_cue
        raise RecordingParseError(
            f"Línea {line}: señal verbal desconocida {tokens.iloc[first_cue]!r}.",
            code='cue',
            line=line,
        )
    return values, tokens.map(CUE_CODES).to_numpy(dtype=np.int8)


def write_recording(rec: RawRecording, path) -> Path:
    """Escribe la grabación; pandas conserva la precisión de ida y vuelta de cada float."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = pd.DataFrame(rec.channels, columns=CHANNEL_COLUMNS)
    body['cue'] = [Intent(int(cue)).token for cue in rec.cues]
    with path.open('w', newline='', encoding='utf-8') as fh:
        fh.write(','.join(META_HEADER) + '\n')
        fh.write(f"{rec.subject_id},{rec.day},{rec.condition.value},{rec.sample_rate_hz}\n")
        body.to_csv(fh, index=False, lineterminator='\n')
    return path
