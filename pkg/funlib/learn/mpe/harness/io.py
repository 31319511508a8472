from ..errors import ConfigurationError, IngestionError
from ..estimators.data import Dataset, MIN_OBSERVATIONS
import json
import logging
import numpy as np
import pandas as pd
import re
import sys

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('y', 'd')

_COVARIATE = re.compile(r'^x(\d+)$')

# floats are written with enough digits to be read back exactly
FLOAT_FORMAT = '%.17g'


def _covariate_columns(columns):

    matches = [(_COVARIATE.match(c), c) for c in columns]
    return [c for _, c in sorted(
        (int(m.group(1)), c) for m, c in matches if m is not None)]


def load_csv(path):
    '''Read a :class:`Dataset` from a CSV file with a header row.

    Required columns are ``y`` and ``d``; ``x1..xk`` and ``z`` are picked up
    when present, other columns are ignored. Rows with a missing or
    non-numeric cell in any used column are dropped and counted.
    '''

    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (OSError, pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise IngestionError("can not read %s: %s" % (path, e)) from e

    columns = [c.strip() for c in frame.columns]
    frame.columns = columns

    missing = [c for c in REQUIRED_COLUMNS if c not in columns]
    if missing:
        raise IngestionError(
            "%s misses required columns %s (found %s)" %
            (path, ', '.join(missing), ', '.join(columns)))

    covariates = _covariate_columns(columns)
    used = list(REQUIRED_COLUMNS) + covariates
    if 'z' in columns:
        used.append('z')

    numeric = frame[used].apply(pd.to_numeric, errors='coerce')
    numeric = numeric.replace([np.inf, -np.inf], np.nan)
    valid = numeric.notna().all(axis=1)
    dropped = int((~valid).sum())
    numeric = numeric[valid]

    if dropped:
        logger.warning(
            "dropped %d of %d rows of %s with missing or non-numeric cells",
            dropped, len(frame), path)

    if len(numeric) < MIN_OBSERVATIONS:
        raise IngestionError(
            "%s has %d valid rows, at least %d are needed" %
            (path, len(numeric), MIN_OBSERVATIONS))

    logger.info(
        "read %d rows of %s, %d covariates%s",
        len(numeric), path, len(covariates),
        ', with instrument' if 'z' in used else '')

    return Dataset(
        y=numeric['y'].to_numpy(dtype=np.float64),
        d=numeric['d'].to_numpy(dtype=np.float64),
        x=numeric[covariates].to_numpy(dtype=np.float64)
        if covariates else None,
        z=numeric['z'].to_numpy(dtype=np.float64) if 'z' in used else None)


def export_csv(sample, path, with_latents=False):
    '''Write a simulated :class:`DgpSample` in the schema of
    :func:`load_csv`. The latent columns ``e`` and ``eta`` are only written
    with ``with_latents``.'''

    columns = {'y': sample.y, 'd': sample.d}
    for j in range(sample.x.shape[1]):
        columns['x%d' % (j + 1)] = sample.x[:, j]
    if sample.z is not None:
        columns['z'] = sample.z

    if with_latents:
        columns['e'] = sample.e
        if sample.eta is not None:
            columns['eta'] = sample.eta

    pd.DataFrame(columns).to_csv(path, index=False, float_format=FLOAT_FORMAT)

    logger.info(
        "exported %d simulated rows to %s%s",
        sample.n, path, ' with latents' if with_latents else '')


def _json_default(value):

    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()

    raise TypeError("%s is not JSON serializable" % type(value).__name__)


def to_json(record):
    return json.dumps(
        record.to_dict(),
        sort_keys=True,
        indent=2,
        default=_json_default)


def to_frame(record):
    '''One row per replication plus a ``summary`` row, told apart by the
    ``kind`` column.'''

    rows = [
        dict(kind='replication', **replication)
        for replication in record.replications]

    if record.estimate is not None:
        rows.append(dict(
            kind='estimate',
            value=record.estimate['value'],
            n_used=record.estimate['n_used'],
            n_trimmed=record.estimate['n_trimmed']))

    for check in record.checks:
        rows.append(dict(
            kind='check',
            name=check['name'],
            passed=check['passed']))

    summary = dict(kind='summary')
    summary.update(record.summary)
    summary.update(record.trim)
    if isinstance(record.oracle, dict):
        summary.update(
            {'oracle_%s' % k: v for k, v in record.oracle.items()})
    rows.append(summary)

    frame = pd.DataFrame(rows)
    frame.insert(1, 'config_hash', record.config_hash)

    return frame


def emit(record, out_path=None, format='json'):
    '''Write ``record`` to ``out_path`` (stdout if ``None``) as a single JSON
    object or as CSV.'''

    if format == 'json':
        text = to_json(record) + '\n'
    elif format == 'csv':
        text = to_frame(record).to_csv(index=False, float_format=FLOAT_FORMAT)
    else:
        raise ConfigurationError("unknown output format %r" % format)

    if out_path is None:
        sys.stdout.write(text)
        return

    with open(out_path, 'w') as f:
        f.write(text)

    logger.info("wrote %s results to %s", format, out_path)
