"""Non-equilibrium dynamical structure factors of transverse-field Ising chains."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    Error,
    SizeError,
    __version__,
    bound_state_spectrum,
    burg_extend,
    compute as _compute,
    continuum_bounds,
    correlation_series,
    default_config as _default_config,
    ed_correlation,
    lehmann_spectrum,
    momentum_grid,
    parse_angle,
    parzen_kernel,
    qcp_bounds,
    reference as _reference,
    run as _run,
    rydberg_identity_residual,
    spinon_dispersion,
)


def default_config():
    """Default run configuration as a dict."""
    return _json.loads(_default_config())


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def compute(config):
    """Evolve and transform one parameter point; returns correlations and spectrum."""
    return _compute(_text(config))


def run(config):
    """Run a single point or a scan, writing CSV files and manifest.json."""
    return _run(_text(config))


def reference(config):
    """Write analytic reference files (bounds, bound states, dispersion)."""
    return _reference(_text(config))
