"""Linear eigenvalue statistics of non-Hermitian random band matrices.

Thin wrapper around the compiled ``_bandclt`` extension.
"""

import json as _json

from ._bandclt import *  # noqa: F401,F403
from ._bandclt import __version__, run_experiment as _run_experiment


def run(config):
    """Run a Monte Carlo experiment.

    ``config`` is a dict (or JSON string) in the experiment config schema.
    Returns ``(report, samples_csv)`` with the report parsed into a dict.
    """
    text = config if isinstance(config, str) else _json.dumps(config)
    report, csv = _run_experiment(text)
    return _json.loads(report), csv
