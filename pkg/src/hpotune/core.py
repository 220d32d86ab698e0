"""Trial records, budgets and the shared ``optimize`` contract.

Every strategy evaluates configurations through a :class:`TrialRecorder`,
which numbers trials contiguously from 0, times each objective call,
enforces the evaluation budget and forwards each trial to an optional sink
(for example :class:`JsonlSink`).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import BudgetExhausted, EmptyHistory, TuneError, UnknownStrategy
from .space import SearchSpace

Objective = Callable[[dict], float]

STRATEGIES = ("grid", "random", "bayes", "ga", "pso")


@dataclass(frozen=True)
class Trial:
    index: int
    config: dict
    score: float
    wall_time_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"index": self.index, "config": dict(self.config), "score": self.score,
                "wall_time": self.wall_time_seconds}

    @classmethod
    def from_dict(cls, d: dict) -> Trial:
        return cls(int(d["index"]), dict(d["config"]), float(d["score"]), float(d.get("wall_time", 0.0)))


@dataclass(frozen=True)
class Budget:
    max_evaluations: int

    def __post_init__(self):
        if isinstance(self.max_evaluations, bool) or int(self.max_evaluations) < 1:
            raise TuneError(f"budget must be a positive integer, got {self.max_evaluations!r}")


def as_budget(budget) -> Budget | None:
    if budget is None or isinstance(budget, Budget):
        return budget
    return Budget(int(budget))


@dataclass
class StrategyResult:
    best_config: dict
    best_score: float
    history: list
    strategy_name: str
    seed: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy_name,
            "seed": self.seed,
            "best_config": dict(self.best_config),
            "best_score": self.best_score,
            "n_trials": len(self.history),
            "extras": dict(self.extras),
        }


def incumbent(history: Iterable[Trial]) -> Trial:
    """Earliest trial with the maximal score."""
    best = None
    for t in history:
        if best is None or t.score > best.score:
            best = t
    if best is None:
        raise EmptyHistory("no trials to choose from")
    return best


def running_best(history: Iterable[Trial]) -> list[float]:
    out, best = [], float("-inf")
    for t in history:
        best = max(best, t.score)
        out.append(best)
    return out


class JsonlSink:
    """Append one JSON object per trial to ``path``."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")

    def __call__(self, trial: Trial) -> None:
        self._fh.write(json.dumps(trial.to_dict(), sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trials(path) -> list[Trial]:
    with open(path, encoding="utf-8") as fh:
        return [Trial.from_dict(json.loads(line)) for line in fh if line.strip()]


class TrialRecorder:
    def __init__(self, objective: Objective, space: SearchSpace, budget=None, sink=None):
        self.objective = objective
        self.space = space
        self.budget = as_budget(budget)
        self.sink = sink
        self.history: list[Trial] = []

    @property
    def remaining(self) -> float:
        if self.budget is None:
            return float("inf")
        return self.budget.max_evaluations - len(self.history)

    @property
    def exhausted(self) -> bool:
        return self.remaining <= 0

    def evaluate(self, config: dict) -> float:
        if self.exhausted:
            raise BudgetExhausted(f"budget of {self.budget.max_evaluations} evaluations used up")
        t0 = time.perf_counter()
        score = float(self.objective(config))
        trial = Trial(len(self.history), dict(config), score, time.perf_counter() - t0)
        self.history.append(trial)
        if self.sink is not None:
            self.sink(trial)
        return score

    def result(self, name: str, seed: int, **extras) -> StrategyResult:
        best = incumbent(self.history)
        return StrategyResult(dict(best.config), best.score, list(self.history), name, seed, extras)


def run_strategy(name: str, space: SearchSpace, objective: Objective, budget=None, seed: int = 0,
                 params: dict | None = None, sink=None) -> StrategyResult:
    """Dispatch to one of :data:`STRATEGIES`.

    ``budget`` caps objective calls for every strategy except ``grid``, which
    always evaluates its full product.
    """
    params = dict(params or {})
    if name == "grid":
        from .strategies.grid_random import grid_search
        return grid_search(space, objective, sink=sink)
    if name == "random":
        from .strategies.grid_random import random_search
        return random_search(space, objective, budget, seed, sink=sink)
    if name == "bayes":
        from .strategies.bayes import bayes_optimize
        return bayes_optimize(space, objective, budget, seed, sink=sink, **params)
    if name == "ga":
        from .strategies.ga import GAParams, ga_optimize
        return ga_optimize(space, objective, GAParams(**params), seed, budget=budget, sink=sink)
    if name == "pso":
        from .strategies.pso import PSOParams, pso_optimize
        return pso_optimize(space, objective, PSOParams(**params), seed, budget=budget, sink=sink)
    raise UnknownStrategy(f"unknown strategy {name!r}; expected one of {STRATEGIES}")
