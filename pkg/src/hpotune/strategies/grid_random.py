"""Exhaustive grid search and plain random search."""
from __future__ import annotations

from ..core import StrategyResult, TrialRecorder, as_budget
from ..errors import TuneError
from ..rng import SeededRandomStream
from ..space import SearchSpace, enumerate_grid, sample


def grid_search(space: SearchSpace, objective, *, sink=None) -> StrategyResult:
    """Evaluate every grid point once, in enumeration order."""
    configs = enumerate_grid(space)
    rec = TrialRecorder(objective, space, sink=sink)
    for config in configs:
        rec.evaluate(config)
    return rec.result("grid", 0)


def random_stream(seed: int) -> SeededRandomStream:
    """The substream random search draws its configurations from."""
    return SeededRandomStream(seed).child("random")


def random_search(space: SearchSpace, objective, budget, seed: int, *, sink=None) -> StrategyResult:
    """``budget`` independent samples; repeats are evaluated again, not skipped."""
    budget = as_budget(budget)
    if budget is None:
        raise TuneError("random search needs a budget of at least 1")
    stream = random_stream(seed)
    rec = TrialRecorder(objective, space, budget, sink=sink)
    while not rec.exhausted:
        rec.evaluate(sample(space, stream))
    return rec.result("random", seed)
