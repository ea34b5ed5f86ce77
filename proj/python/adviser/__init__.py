"""Vaccination intervention planning: solver, pipeline and simulator bindings.

Problems, plans and reports are plain dicts in the same JSON layout the
command-line tool reads and writes.
"""

import json
import os

from . import _core
from ._core import AdviserError, StageError, ValidationError

__all__ = [
    "AdviserError",
    "StageError",
    "ValidationError",
    "branch_and_bound",
    "brute_force",
    "fit_logistic",
    "greedy_prune",
    "need_scores",
    "run_pipeline",
    "run_stage",
    "simulate",
    "validate_plan",
    "write_world",
]


def _dump(value):
    return value if isinstance(value, str) else json.dumps(value)


def branch_and_bound(problem, node_cap=0):
    return json.loads(_core.branch_and_bound(_dump(problem), node_cap))


def brute_force(problem):
    return json.loads(_core.brute_force(_dump(problem)))


def validate_plan(plan, problem):
    """Returns (valid, violation kinds, details)."""
    valid, kinds, details = _core.validate_plan(_dump(plan), _dump(problem))
    return valid, list(kinds), list(details)


def greedy_prune(problem, ratio_threshold=None, budget_fraction=0.5):
    return json.loads(_core.greedy_prune(_dump(problem), ratio_threshold, budget_fraction))


def run_pipeline(config, *, resume=False, period=None, budget=None, seed=None):
    """Runs every stage. `period` is a (from, to) pair of ISO dates."""
    start, end = period if period is not None else (None, None)
    return json.loads(_core.run_pipeline(os.fspath(config), resume, start, end, budget, seed))


def run_stage(name, config):
    """Runs one stage; returns its wall-clock seconds."""
    return _core.run_stage(name, os.fspath(config))


def write_world(directory, n, seed, budget, training_samples=5000):
    """Writes a synthetic registry, centers, model and config; returns the config path."""
    return _core.write_world(os.fspath(directory), n, seed, budget, training_samples)


def simulate(directory, n=2000, reps=500, seed=7, budget_share=0.25, training_samples=5000, threads=1):
    return json.loads(
        _core.simulate(os.fspath(directory), n, reps, seed, budget_share, training_samples, threads)
    )


def need_scores(model, features):
    return _core.need_scores(os.fspath(model), list(features))


def fit_logistic(features, outcomes, l2=0.0):
    return _core.fit_logistic([list(map(float, row)) for row in features], [bool(y) for y in outcomes], l2)
