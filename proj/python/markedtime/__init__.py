"""Python bindings for the markedtime C++ core."""

import json as _json

from ._core import (  # noqa: F401
    AdmissibilityViolation,
    MarketSpec,
    ValidationError,
    closed_form_vf,
    compare,
    conditional_density,
    density_normalization,
    estimate,
    info_drift,
    jump_exact_vf,
    market_alpha,
    run_command,
)
from ._core import lab_check as _lab_check


def lab_check(n_models=100, seed=20240611, rational=True):
    """Run the lattice suite; returns (all_pass, manifest dict)."""
    ok, manifest = _lab_check(n_models, seed, rational)
    return ok, _json.loads(manifest)
