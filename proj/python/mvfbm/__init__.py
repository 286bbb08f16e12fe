"""Euler-Maruyama particle schemes for delay McKean-Vlasov SDEs driven by fractional Brownian motion.

Study functions take the same configuration dictionaries as the ``mvfbm`` command-line tool.
"""

import json

from ._core import (
    Error,
    IoError,
    NumericalError,
    UsageError,
    __version__,
    coarsen,
    fbm_path,
    fgn,
    fgn_autocovariance,
    fit_log_log,
    moment,
    opinion_kernel,
    wasserstein,
)
from . import _core

__all__ = [
    "Error",
    "IoError",
    "NumericalError",
    "UsageError",
    "chaos",
    "coarsen",
    "convergence",
    "fbm_path",
    "fgn",
    "fgn_autocovariance",
    "fit_log_log",
    "moment",
    "opinion_kernel",
    "probe_maximal",
    "probe_moments",
    "simulate",
    "wasserstein",
]


def _dump(config):
    return config if isinstance(config, str) else json.dumps(config)


def simulate(config):
    """Run the particle scheme once; returns times, states (rows, N, d) and grid data."""
    return _core._simulate(_dump(config))


def convergence(config):
    """Strong error against a fine reference grid, one table per Hurst index."""
    return _core._convergence(_dump(config))


def chaos(config):
    """Gap between N-particle systems and a larger shared-noise reference system."""
    return _core._chaos(_dump(config))


def probe_maximal(config):
    """Monte Carlo E[sup |B^H|^p] against the horizon, one probe per Hurst index."""
    return _core._probe_maximal(_dump(config))


def probe_moments(config):
    """E[max_k |Z(t_k)|^p] across step sizes."""
    return _core._probe_moments(_dump(config))
