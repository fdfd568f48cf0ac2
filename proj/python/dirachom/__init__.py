"""Homogenization lab for the 2D Dirac operator with piecewise-constant mass."""

import json as _json

from ._core import (  # noqa: F401
    AssumptionError,
    ConfigError,
    FitError,
    Shape,
    __version__,
    abstract_scheme,
    bramble_payne_bound,
    calibrated_mass,
    eta,
    fiber_matrix,
    fit_rate,
    free_fiber_eigenvalues,
    gap,
    nrc_estimate,
    payne_weinberger_bound,
    replay,
    robin_weak_bound,
    run_bands,
    spectral_constants,
    steklov_lower_bound,
)
from . import _core


def parse_config(text):
    """Parsed INI config as a dict of sections."""
    return _json.loads(_core.parse_config(text))


def shape_constants(shape, m_star, md_max, h=0.1):
    return _json.loads(_core.shape_constants_json(shape, m_star, md_max, h))


def run_constants(config, out, exploratory=False):
    return _json.loads(_core.run_constants(config, out, exploratory))


def run_validate(config, out, exploratory=False):
    return _json.loads(_core.run_validate(config, out, exploratory))


def run_sweep(config, out, exploratory=False):
    """Runs a sweep and returns the records CSV text."""
    return _core.run_sweep(config, out, exploratory)
