"""Search strategies. All return a :class:`~hpotune.core.StrategyResult`."""
from .bayes import bayes_optimize, expected_improvement, gp_fit, gp_predict
from .ga import GAParams, ga_optimize
from .grid_random import grid_search, random_search
from .pso import PSOParams, pso_optimize

__all__ = [
    "GAParams",
    "PSOParams",
    "bayes_optimize",
    "expected_improvement",
    "ga_optimize",
    "gp_fit",
    "gp_predict",
    "grid_search",
    "pso_optimize",
    "random_search",
]
