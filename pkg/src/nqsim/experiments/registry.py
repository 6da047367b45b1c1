"""Experiment registry: ids, parameter schemas, default configs, dispatch."""

from __future__ import annotations

from .. import units
from .report import RunContext

RUNNERS = {}
PARAMS = {}


def experiment(exp_id, params):
    """Register a runner; ``params`` maps name -> (dimension, default)."""

    def wrap(fn):
        if exp_id in RUNNERS:
            raise ValueError(f"duplicate experiment id {exp_id!r}")
        RUNNERS[exp_id] = fn
        PARAMS[exp_id] = dict(params)
        return fn

    return wrap


def experiment_ids():
    return sorted(RUNNERS)


def default_config(exp_id) -> dict:
    _require(exp_id)
    return {name: default for name, (dim, default) in PARAMS[exp_id].items()}


def resolve_config(exp_id, overrides=None) -> dict:
    """Merge overrides into the defaults and convert quantities to SI floats."""
    _require(exp_id)
    spec = PARAMS[exp_id]
    merged = default_config(exp_id)
    for key, value in (overrides or {}).items():
        if key not in spec:
            raise KeyError(f"unknown parameter {key!r} for experiment {exp_id!r}")
        merged[key] = value
    resolved = {}
    for name, value in merged.items():
        dim = spec[name][0]
        if dim in ("int",):
            resolved[name] = int(value)
        elif dim in ("bool",):
            resolved[name] = bool(value)
        elif dim in ("str",):
            resolved[name] = str(value)
        else:
            resolved[name] = units.parse_quantity(value, None if dim == "scalar" else dim)
    return resolved


def run_experiment(exp_id, config=None, seed=0):
    """Run one experiment and return its ExperimentReport.

    ``config`` holds overrides for the paper-anchored defaults; values may
    be unit-suffixed strings or SI numbers.  Reports are deterministic in
    (config, seed).
    """
    _require(exp_id)
    resolved = resolve_config(exp_id, config)
    ctx = RunContext(exp_id, resolved, int(seed))
    RUNNERS[exp_id](ctx)
    return ctx.report


def _require(exp_id):
    if exp_id not in RUNNERS:
        raise KeyError(f"unknown experiment id {exp_id!r}; known: {', '.join(experiment_ids())}")
