"""Python bindings for the safe_el C++ core."""

import json

from ._safe_el import (  # noqa: F401
    BlfParams,
    ManipulatorModel,
    SafeElError,
    accel,
    blf_torque,
    coriolis_matrix,
    forward_kinematics,
    gravity_vector,
    inverse_kinematics,
    jacobian,
    kkt_oracle,
    mass_matrix,
    preset_json,
    preset_names,
    regressor_phi,
    run_json,
    solve_min_norm,
)


def preset(name):
    """Scenario preset as a plain dict."""
    return json.loads(preset_json(name))


def run(scenario, **overrides):
    """Run a preset id or scenario dict.

    Keyword overrides use double underscores for nesting, e.g. sim__T=1.0.
    Returns (summary dict, {column: numpy array}).
    """
    import numpy as np

    cfg = preset(scenario) if isinstance(scenario, str) else json.loads(json.dumps(scenario))
    for key, value in overrides.items():
        node = cfg
        *path, leaf = key.split("__")
        for part in path:
            node = node[part]
        if leaf not in node:
            raise KeyError(key)
        node[leaf] = value
    out = run_json(json.dumps(cfg))
    cols = {k: np.asarray(v) for k, v in out["columns"].items()}
    return json.loads(out["summary_json"]), cols
