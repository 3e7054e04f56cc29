"""Python bindings for the covloss engine."""

import json as _json

from ._covloss import (
    ConfigError,
    SweepError,
    allocation_coefficient,
    ccp_margins,
    check_increasing_differences,
    default_threshold,
    effective_ccp_config,
    empirical_var,
    expected_loss_closed_form,
    expected_shortfall,
    run_cli,
    sample_scenarios,
    t_cdf,
    t_quantile,
)
from . import _covloss


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_cell(config):
    """Risk report of one correlation cell; config is a dict or JSON text."""
    return _json.loads(_covloss.run_cell_json(_text(config)))


def run_sweep(config, rho_cr=None, rho_wwr=None):
    """Risk reports over a grid plus the monotonicity report."""
    return _json.loads(_covloss.run_sweep_json(_text(config), rho_cr, rho_wwr))


__all__ = [
    "ConfigError",
    "SweepError",
    "allocation_coefficient",
    "ccp_margins",
    "check_increasing_differences",
    "default_threshold",
    "effective_ccp_config",
    "empirical_var",
    "expected_loss_closed_form",
    "expected_shortfall",
    "run_cell",
    "run_cli",
    "run_sweep",
    "sample_scenarios",
    "t_cdf",
    "t_quantile",
]
