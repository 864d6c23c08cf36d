"""Python front end for the lamination core.

Configs are plain dicts with the same schema as the JSON files the CLI reads.
"""

import json
import os

from . import _lamination
from ._lamination import effective_weight, newton_mercator, zeta, cpmm_linearization_error

__all__ = [
    "LaminationError",
    "load_config",
    "normalize_config",
    "solve",
    "verify",
    "simulate",
    "sweep",
    "effective_weight",
    "zeta",
    "newton_mercator",
    "cpmm_linearization_error",
]


class LaminationError(Exception):
    """Raised for every core error. `code` matches the CLI error codes."""

    def __init__(self, code, message, context):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.context = context


def _call(fn, cfg, *args):
    try:
        return fn(json.dumps(cfg), *args)
    except _lamination.LaminationError as e:
        payload = json.loads(str(e))
        raise LaminationError(payload["code"], payload["message"], payload.get("context", {})) from None


def load_config(path):
    with open(path) as f:
        return json.load(f)


def normalize_config(cfg):
    return json.loads(_call(_lamination.normalize_config, cfg))


def solve(cfg):
    return json.loads(_call(_lamination.solve, cfg))


def verify(cfg):
    return json.loads(_call(_lamination.verify, cfg))


def simulate(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    return _call(_lamination.simulate, cfg, str(out_dir))


def sweep(cfg, axis, values):
    """Long-format CSV text, one row per (point, player)."""
    return _call(_lamination.sweep, cfg, axis, [float(v) for v in values])
