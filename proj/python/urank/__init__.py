"""Pairwise ranking risk, its Hoeffding decomposition and Rademacher chaos statistics.

Rules, classes, models and configs are plain dicts in the same JSON layout the
command-line tool reads; results come back as dicts.
"""

import json

import numpy as np

from . import _urank
from ._urank import ValidationError, __version__

__all__ = [
    "ValidationError",
    "__version__",
    "bound_report",
    "decompose",
    "empirical_risk",
    "erm",
    "experiment",
    "run_cli",
    "sample",
]


def _doc(value):
    return value if isinstance(value, str) else json.dumps(value)


def empirical_risk(x, y, rule, threads=1):
    return json.loads(_urank.empirical_risk(np.asarray(x), np.asarray(y), _doc(rule), threads))


def decompose(x, y, rule, oracle, threads=1):
    """Summary of the decomposition (lambda, lambda_n, t_n, w_n, residual)."""
    return json.loads(_urank.decompose(np.asarray(x), np.asarray(y), _doc(rule), _doc(oracle), threads))


def bound_report(x, y, cls, oracle, delta=0.1, reps=50, seed=1, threads=1):
    return json.loads(
        _urank.bound_report(np.asarray(x), np.asarray(y), _doc(cls), _doc(oracle), delta, reps, seed, threads)
    )


def erm(x, y, cls, threads=1):
    return json.loads(_urank.erm(np.asarray(x), np.asarray(y), _doc(cls), threads))


def sample(model, n, seed):
    """Draw n points; returns (x of shape (n, dim), y)."""
    return _urank.sample(_doc(model), n, seed)


def experiment(study, config, threads=1):
    return json.loads(_urank.experiment(study, _doc(config), threads))


def run_cli(args):
    """Run the command-line tool in-process; returns (exit_code, stdout, stderr)."""
    return _urank.run_cli([str(a) for a in args])
